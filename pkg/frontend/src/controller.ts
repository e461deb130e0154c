/** UI logic, kept free of the DOM so it is testable headlessly.
 *
 * The controller owns one session at a time, serializes its own requests,
 * and renders exclusively from service responses — there is no client-side
 * simulation. Whenever the backend is unreachable every control goes inert
 * until a retry succeeds.
 */
import { ApiClient, BackendUnreachable, ServiceError } from "./api.js";
import type { StimulusRequest } from "./api.js";
import { buildScenario, scenarioFilename, serializeScenario } from "./export.js";
import { computeLayout, type Layout } from "./layout.js";
import type {
  Diagnostic,
  DiagramView,
  TakenStep,
  TraceEntry,
  Value,
} from "./types.js";

export type BannerKind = "info" | "warn" | "error";

export interface View {
  renderDiagram(layout: Layout | null, active: string | null, flashed: TakenStep[]): void;
  renderEnv(env: Record<string, Value>): void;
  renderTrace(rows: string[]): void;
  showBanner(kind: BannerKind, text: string): void;
  showDiagnostics(diagnostics: Diagnostic[]): void;
  setControlsEnabled(enabled: boolean): void;
  offerDownload(filename: string, content: string): void;
}

export function parseValueInput(text: string): Value {
  const trimmed = text.trim();
  if (trimmed === "true") return true;
  if (trimmed === "false") return false;
  if (/^-?\d+$/.test(trimmed)) return Number(trimmed);
  throw new Error(`invalid value '${trimmed}' (expected integer, true or false)`);
}

export function formatValue(value: Value): string {
  return String(value);
}

export function renderTraceRow(entry: TraceEntry): string {
  const stim = entry.stimulus;
  let head: string;
  if (stim[0] === "ENTER") head = "enter";
  else if (stim[0] === "SET_VAR") head = `set ${stim[1]} = ${formatValue(stim[2])}`;
  else head = `raise ${stim[1]}`;
  const hops =
    entry.taken.length === 0
      ? "no transition"
      : entry.taken.map((t) => `${t.source} → ${t.target}`).join(", ");
  return `${head}: ${hops} ⇒ ${entry.active}`;
}

export class Controller {
  private machineName: string | null = null;
  private diagram: DiagramView | null = null;
  private layout: Layout | null = null;
  private sessionId: string | null = null;
  private trace: TraceEntry[] = [];
  private busy = false;
  backendReachable = true;

  constructor(
    private readonly api: ApiClient,
    private readonly view: View,
  ) {}

  /** Load model source, create a fresh session, render the diagram. */
  async loadModel(source: string): Promise<void> {
    await this.guarded(async () => {
      this.view.showDiagnostics([]);
      const model = await this.api.uploadModel(source);
      this.diagram = model.diagram;
      this.machineName = this.inferMachineName(source);
      this.layout = computeLayout(model.diagram);
      const session = await this.api.createSession(model.model_id);
      this.sessionId = session.session_id;
      await this.refresh([]);
      this.view.showBanner("info", `model loaded; active: ${session.active}`);
    });
  }

  async setVariable(name: string, rawValue: string): Promise<void> {
    let value: Value;
    try {
      value = parseValueInput(rawValue);
    } catch (error) {
      this.view.showBanner("error", (error as Error).message);
      return;
    }
    await this.steer({ kind: "set_var", name, value });
  }

  async raiseEvent(name: string): Promise<void> {
    await this.steer({ kind: "raise", name });
  }

  async reset(): Promise<void> {
    await this.guarded(async () => {
      if (this.sessionId === null) return;
      await this.api.resetSession(this.sessionId);
      await this.refresh([]);
      this.view.showBanner("info", "session reset");
    });
  }

  /** Retry connectivity: re-fetch the session (or just re-enable on success). */
  async retry(): Promise<void> {
    await this.guarded(async () => {
      if (this.sessionId !== null) {
        await this.refresh([]);
      }
      this.view.showBanner("info", "backend reachable");
    });
  }

  exportScenario(): void {
    if (this.machineName === null) {
      this.view.showBanner("error", "load a model before exporting");
      return;
    }
    const { scenario, excludedRaises } = buildScenario(this.machineName, this.trace);
    if (excludedRaises > 0) {
      this.view.showBanner(
        "warn",
        `${excludedRaises} raised event(s) excluded: scenarios replay variable assignments only`,
      );
    }
    this.view.offerDownload(
      scenarioFilename(this.machineName),
      serializeScenario(scenario),
    );
  }

  private async steer(stimulus: StimulusRequest): Promise<void> {
    await this.guarded(async () => {
      if (this.sessionId === null) {
        this.view.showBanner("error", "load a model first");
        return;
      }
      const after = await this.api.sendStimulus(this.sessionId, stimulus);
      await this.refresh(after.taken ?? []);
      if (after.status === "FINALIZED") {
        this.view.showBanner("info", "machine finalized — reset to continue");
      } else if ((after.taken ?? []).length === 0) {
        this.view.showBanner("info", "no transition");
      }
    });
  }

  private async refresh(flashed: TakenStep[]): Promise<void> {
    if (this.sessionId === null) return;
    const detail = await this.api.getSession(this.sessionId);
    this.trace = detail.trace;
    this.view.renderDiagram(this.layout, detail.active, flashed);
    this.view.renderEnv(detail.env);
    this.view.renderTrace(detail.trace.map(renderTraceRow));
  }

  /** Run one UI action: serialize, map errors, manage the inert state. */
  private async guarded(action: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await action();
      if (!this.backendReachable) {
        this.backendReachable = true;
        this.view.setControlsEnabled(true);
      }
    } catch (error) {
      if (error instanceof BackendUnreachable) {
        this.backendReachable = false;
        this.view.setControlsEnabled(false);
        this.view.showBanner("error", "backend unreachable — controls disabled, retry when it is back");
      } else if (error instanceof ServiceError) {
        if (error.diagnostics.length > 0) {
          this.view.showDiagnostics(error.diagnostics);
        }
        if (error.code === "E_NOT_RUNNING") {
          this.view.showBanner("error", "machine finalized — reset to continue");
        } else {
          this.view.showBanner("error", `${error.code}: ${error.message}`);
        }
      } else {
        this.view.showBanner("error", String(error));
      }
    } finally {
      this.busy = false;
    }
  }

  private inferMachineName(source: string): string {
    const match = /statechart\s+([A-Za-z_][A-Za-z0-9_]*)/.exec(source);
    return match?.[1] ?? "machine";
  }

  /** Exposed for rendering variable forms / event buttons. */
  currentDiagram(): DiagramView | null {
    return this.diagram;
  }

  currentTrace(): TraceEntry[] {
    return this.trace;
  }
}
