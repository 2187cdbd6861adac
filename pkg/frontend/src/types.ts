/** Wire types mirroring the survey service payloads. */

export interface SwatchView {
  index: number;
  hex: string;
}

export interface BackgroundView {
  name: string;
  hex: string;
}

export interface Progress {
  answered: number;
  total: number;
}

export type TaskKind = "self" | "image" | "preference" | "attentional";

export interface TaskView {
  done: false;
  session_id: string;
  task_id: string;
  kind: TaskKind;
  scale_id: string;
  background: BackgroundView;
  prompt: string;
  progress: Progress;
  /** Palette tasks: ordered swatches, lightest first, served hex verbatim. */
  swatches?: SwatchView[];
  /** Text-scale tasks: ordered option texts. */
  options?: string[];
  /** Preference tasks: the candidate scale ids. */
  choices?: string[];
  /** Image tasks: asset path on the service. */
  image?: string;
  /** Attentional tasks: the color the rater must locate on the scale. */
  target_hex?: string;
}

export interface SessionComplete {
  done: true;
  session_id: string;
  completed: number;
}

export type NextPayload = TaskView | SessionComplete;

export interface SessionSummary {
  session_id: string;
  rater_id: string;
  study: number;
  background: string;
  scale_order: string[];
  n_tasks: number;
}

export interface SubmitAck {
  accepted: boolean;
  task_id: string;
  kind: string;
}

export type ResponseValue = number | string;
