/** Response shapes of the simulation service. The UI never simulates:
 * everything rendered is a pure function of the last response. */

export type Value = number | boolean;

export interface DiagramState {
  name: string;
  is_initial: boolean;
  is_final: boolean;
}

export interface DiagramTransition {
  source: string;
  target: string;
  label: string;
  decl_index: number;
}

export interface DiagramView {
  states: DiagramState[];
  transitions: DiagramTransition[];
}

export interface ModelResponse {
  model_id: string;
  diagram: DiagramView;
}

export type SessionStatus = "RUNNING" | "FINALIZED" | "FAULTED";

export interface TakenStep {
  source: string;
  target: string;
  decl_index: number;
}

export interface SessionView {
  session_id: string;
  active: string;
  env: Record<string, Value>;
  status: SessionStatus;
  taken?: TakenStep[];
}

export type Stimulus = ["ENTER"] | ["SET_VAR", string, Value] | ["RAISE", string];

export interface TraceEntry {
  stimulus: Stimulus;
  taken: TakenStep[];
  active: string;
}

export interface SessionDetail extends SessionView {
  trace: TraceEntry[];
}

export interface Diagnostic {
  code: string;
  message: string;
  span: { line: number; column: number; length: number } | null;
}

export interface ScenarioFile {
  machine: string;
  expectations: string[];
  variables: string[];
  inputs: Value[];
}
