/** Turn a steering history into a scenario file.
 *
 * Only SET_VAR entries map onto the expectations/variables/inputs triple;
 * the scenario format has no notion of raised events, so RAISE entries are
 * dropped and counted for the caller to warn about.
 */
import type { ScenarioFile, TraceEntry } from "./types.js";

export interface ExportResult {
  scenario: ScenarioFile;
  excludedRaises: number;
}

export function buildScenario(machine: string, trace: TraceEntry[]): ExportResult {
  const scenario: ScenarioFile = {
    machine,
    expectations: [],
    variables: [],
    inputs: [],
  };
  let excludedRaises = 0;
  for (const entry of trace) {
    const stim = entry.stimulus;
    if (stim[0] === "SET_VAR") {
      scenario.variables.push(stim[1]);
      scenario.inputs.push(stim[2]);
      scenario.expectations.push(entry.active);
    } else if (stim[0] === "RAISE") {
      excludedRaises += 1;
    }
    // ENTER is implicit in a scenario run
  }
  return { scenario, excludedRaises };
}

export function serializeScenario(scenario: ScenarioFile): string {
  return JSON.stringify(scenario, null, 2) + "\n";
}

export function scenarioFilename(machine: string): string {
  return `${machine.toLowerCase()}.scenario.json`;
}
