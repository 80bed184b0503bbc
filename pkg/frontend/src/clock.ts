/**
 * Local playback clock.
 *
 * The room state carries an authoritative (playback_time, playing,
 * speed, duration_s) snapshot plus the instant it arrived. Rendering
 * between broadcasts extrapolates from that snapshot only: local
 * time = playback_time + elapsed * speed while playing, looped over
 * [0, duration_s]. Nothing here mutates shared state; scrubbing goes
 * through a state_update like any other edit.
 */

import { SessionState } from "./protocol";

export function playbackTime(state: SessionState, receivedAtMs: number,
                             nowMs: number): number {
  if (!state.playing) return state.playback_time;
  const elapsed = Math.max(0, (nowMs - receivedAtMs) / 1000);
  const t = state.playback_time + elapsed * state.speed;
  const d = state.duration_s;
  if (d <= 0) return 0;
  if (t < d) return t;
  return t % d; // loop the history
}
