/** Transient notification queue for API errors and edit feedback. */

export interface Toast {
  id: number;
  message: string;
  kind: "info" | "error";
  /** Present when the failed action can be retried with one click. */
  retry?: () => void;
  expiresAt: number;
}

export type NowFn = () => number;

export class ToastQueue {
  private toasts: Toast[] = [];
  private nextId = 1;
  private readonly ttlMs: number;
  private readonly now: NowFn;
  onChange: (() => void) | null = null;

  constructor(ttlMs = 5000, now: NowFn = () => Date.now()) {
    this.ttlMs = ttlMs;
    this.now = now;
  }

  push(message: string, kind: "info" | "error" = "info", retry?: () => void): Toast {
    const toast: Toast = {
      id: this.nextId++,
      message,
      kind,
      retry,
      expiresAt: this.now() + this.ttlMs,
    };
    this.toasts.push(toast);
    this.onChange?.();
    return toast;
  }

  dismiss(id: number): void {
    const before = this.toasts.length;
    this.toasts = this.toasts.filter((t) => t.id !== id);
    if (this.toasts.length !== before) this.onChange?.();
  }

  /** Toasts still alive; expired ones are dropped as a side effect. */
  active(): Toast[] {
    const t = this.now();
    const before = this.toasts.length;
    this.toasts = this.toasts.filter((toast) => toast.expiresAt > t);
    if (this.toasts.length !== before) this.onChange?.();
    return [...this.toasts];
  }
}
