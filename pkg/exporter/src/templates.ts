/**
 * Supposition templates: statement patterns wrapping task inputs and label
 * descriptions. The registry file format is shared with the sple toolkit:
 * JSONL lines of {task, pattern, label_texts}.
 */

import { readFileSync } from "node:fs";

export interface SuppositionTemplate {
  task: string;
  pattern: string;
  labelTexts: string[];
}

const PLACEHOLDER = /\{([A-Za-z_][A-Za-z0-9_]*)\}/g;

export const BUILTIN_TEMPLATES: Record<string, SuppositionTemplate> = {
  mnli: { task: "mnli", pattern: "{h} is entailed by {p}.", labelTexts: [] },
  rte: { task: "rte", pattern: "{h} is entailed by {p}.", labelTexts: [] },
  qnli: { task: "qnli", pattern: "The answer to {q} is entailed by {t}.", labelTexts: [] },
  qqp: { task: "qqp", pattern: "{q1}'s answer is entailed by {q2}'s answer.", labelTexts: [] },
  sst2: { task: "sst2", pattern: "The movie is good is entailed by {x}.", labelTexts: [] },
  "label-text": {
    task: "label-text",
    pattern: "{label_text} is entailed by {x}.",
    labelTexts: [],
  },
};

export function placeholders(pattern: string): string[] {
  return [...pattern.matchAll(PLACEHOLDER)].map((m) => m[1]);
}

export function buildSupposition(
  template: SuppositionTemplate,
  bindings: Record<string, string>,
): string {
  for (const name of placeholders(template.pattern)) {
    if (!(name in bindings)) {
      throw new Error(`template ${template.task}: no binding for placeholder {${name}}`);
    }
  }
  return template.pattern.replace(PLACEHOLDER, (_, name: string) => bindings[name]);
}

export function loadTemplates(path: string): Record<string, SuppositionTemplate> {
  const registry: Record<string, SuppositionTemplate> = {};
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    let obj: { task?: string; pattern?: string; label_texts?: string[] };
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}: line ${i + 1}: invalid JSON: ${err}`);
    }
    if (typeof obj.task !== "string" || typeof obj.pattern !== "string") {
      throw new Error(`${path}: line ${i + 1}: template needs task and pattern`);
    }
    registry[obj.task] = {
      task: obj.task,
      pattern: obj.pattern,
      labelTexts: obj.label_texts ?? [],
    };
  });
  return registry;
}

export function resolveTemplate(
  name: string,
  registryPath?: string,
): SuppositionTemplate {
  const registry = registryPath ? loadTemplates(registryPath) : BUILTIN_TEMPLATES;
  const template = registry[name];
  if (!template) {
    const known = Object.keys(registry).join(", ");
    throw new Error(`unknown task template "${name}"; known: ${known}`);
  }
  return template;
}
