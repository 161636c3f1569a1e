/**
 * Clock and scheduling seams, injectable so tests can drive time directly.
 */

export type Clock = () => number; // monotonic milliseconds
export type Cancel = () => void;
export type Schedule = (fn: () => void, delayMs: number) => Cancel;

export const realClock: Clock = () => performance.now();

export const realSchedule: Schedule = (fn, delayMs) => {
  const id = setTimeout(fn, delayMs);
  return () => clearTimeout(id);
};

export interface CountdownHandle {
  cancel: Cancel;
}

/**
 * Ticks once per second: n, n-1, ..., 1, then fires `done`.
 * The first tick is immediate.
 */
export function startCountdown(
  seconds: number,
  onTick: (secondsLeft: number) => void,
  onDone: () => void,
  schedule: Schedule,
): CountdownHandle {
  let remaining = Math.max(0, Math.floor(seconds));
  let cancel: Cancel = () => {};
  const step = () => {
    if (remaining <= 0) {
      onDone();
      return;
    }
    onTick(remaining);
    remaining -= 1;
    cancel = schedule(step, 1000);
  };
  step();
  return { cancel: () => cancel() };
}
