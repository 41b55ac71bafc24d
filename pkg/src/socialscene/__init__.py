"""Social perception and human-aware navigation engine.

Submodules:
  scene        shared entity model and snapshot validation
  association  relation graph, assignment solver, identity partition
  doa          sound direction-of-arrival from a stereo microphone pair
  tracker      image-plane detections to ground-plane Kalman tracks
  groups       conversational group (F-formation) detection
  nav          social cost fields and receding-horizon motion planning
  supervisor   interaction phase machine (approach / engage / disengage)
  sim          deterministic scenario simulator, metrics, CLI
  kernels      compiled hot loops with a pure-python fallback
"""

__version__ = "0.1.0"
