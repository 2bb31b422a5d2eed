/**
 * Client bindings for the struct-reward scoring service.
 *
 * An Engine holds a validated run configuration and a persistent connection
 * to a running service instance, so training loops can fetch deterministic
 * rewards and group-relative advantages without per-call subprocess
 * overhead. Judge scoring is deliberately not exposed here (network I/O
 * inside a training step is a pipeline hazard); merge judge scores from
 * cached CLI runs instead.
 */

import { readFileSync } from "node:fs";

export type Dialect = "sql" | "cypher";

/** Per-candidate reward components: judge (null when disabled), string, structural, total. */
export type ScoreTuple = [number | null, number, number, number];

export interface ScoreInput {
  dialect: Dialect;
  gold: string;
  candidates: string[];
  schema_text?: string;
}

export interface EngineOptions {
  /** Service base URL; falls back to the STRUCT_REWARD_URL environment variable. */
  baseUrl?: string;
}

interface ScoreRecord {
  id: string;
  candidate_index: number;
  judge: number | null;
  string: number;
  structural: number;
  total: number;
}

async function postJson(baseUrl: string, path: string, payload: unknown): Promise<any> {
  const response = await fetch(new URL(path, baseUrl), {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  const body: any = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = typeof body?.detail === "string" ? body.detail : JSON.stringify(body);
    throw new Error(detail);
  }
  return body;
}

export class Engine {
  readonly baseUrl: string;
  readonly config: Record<string, unknown> | null;

  private constructor(baseUrl: string, config: Record<string, unknown> | null) {
    this.baseUrl = baseUrl;
    this.config = config;
  }

  /**
   * Create an engine bound to a running service.
   *
   * When configPath is given the file is read locally and validated by the
   * service; an invalid config throws an Error whose message matches the CLI
   * diagnostic for the same file.
   */
  static async create(configPath?: string, options: EngineOptions = {}): Promise<Engine> {
    const baseUrl = options.baseUrl ?? process.env.STRUCT_REWARD_URL;
    if (!baseUrl) {
      throw new Error("no service URL: pass baseUrl or set STRUCT_REWARD_URL");
    }
    let config: Record<string, unknown> | null = null;
    if (configPath !== undefined) {
      const text = readFileSync(configPath, "utf-8");
      const parsed = JSON.parse(text);
      const body = await postJson(baseUrl, "/v1/config/validate", { config: parsed });
      config = body.config;
    }
    return new Engine(baseUrl, config);
  }

  /**
   * Score one gold/candidates group with the engine's config (judge off).
   * Returns one (judge, string, structural, total) tuple per candidate,
   * in candidate order.
   */
  async score(input: ScoreInput): Promise<ScoreTuple[]> {
    if (!Array.isArray(input.candidates) || input.candidates.length === 0) {
      throw new TypeError("candidates must be a non-empty array");
    }
    const record = {
      id: "bound-0",
      question: "",
      schema: input.schema_text ?? "",
      dialect: input.dialect,
      gold: input.gold,
      candidates: input.candidates,
    };
    const body = await postJson(this.baseUrl, "/v1/score", {
      dataset_text: JSON.stringify(record),
      config: this.config,
      judge_mode: "off",
    });
    const records: ScoreRecord[] = body.records;
    return records
      .slice()
      .sort((a, b) => a.candidate_index - b.candidate_index)
      .map((r): ScoreTuple => [r.judge, r.string, r.structural, r.total]);
  }

  /**
   * Group-relative advantages (group z-scores) for one reward vector,
   * computed with the default advantage configuration.
   */
  async advantages(rewards: number[]): Promise<number[]> {
    if (!Array.isArray(rewards) || rewards.length === 0) {
      throw new TypeError("rewards must be a non-empty array");
    }
    rewards.forEach((r, i) => {
      if (typeof r !== "number" || !Number.isFinite(r)) {
        throw new TypeError(`rewards[${i}] is not finite`);
      }
    });
    const body = await postJson(this.baseUrl, "/v1/advantages", {
      groups: [{ id: "bound-0", rewards }],
    });
    return body.groups[0].advantages;
  }

  /** Service liveness probe. */
  async healthy(): Promise<boolean> {
    try {
      const response = await fetch(new URL("/healthz", this.baseUrl));
      return response.ok;
    } catch {
      return false;
    }
  }
}
