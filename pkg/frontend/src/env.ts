import { Bridge, BridgeError } from "./bridge.js";

export interface BoxSpace {
  low: number[];
  high: number[];
  shape: [number];
}

/** Space metadata cached at construction; the numbers never change after. */
export interface EnvSpaces {
  observation: BoxSpace;
  action: BoxSpace;
  reward: BoxSpace;
  horizon: number;
  reservoirs: string[];
}

export interface ResetResult {
  observation: Float64Array;
  info: Record<string, unknown>;
}

export interface StepResult {
  observation: Float64Array;
  reward: Float64Array;
  terminated: boolean;
  truncated: boolean;
  info: Record<string, unknown>;
}

export interface MakeOptions {
  configPath?: string;
  bridge?: Bridge;
}

interface RawMake {
  env_id: number;
  observation_low: number[];
  observation_high: number[];
  action_low: number[];
  action_high: number[];
  reward_low: number[];
  reward_high: number[];
  horizon: number;
  reservoirs: string[];
}

function box(low: number[], high: number[]): BoxSpace {
  return { low, high, shape: [low.length] };
}

/**
 * Handle on one native environment instance. All dynamics run on the Python
 * side; this class ships actions across and hands tuples back. A handle must
 * not be used from two concurrent call chains; distinct handles are fully
 * independent, even on a shared bridge.
 */
export class NileEnv {
  readonly spaces: EnvSpaces;
  private envId: number;

  private constructor(
    private readonly bridge: Bridge,
    private readonly ownsBridge: boolean,
    raw: RawMake,
  ) {
    this.envId = raw.env_id;
    this.spaces = {
      observation: box(raw.observation_low, raw.observation_high),
      action: box(raw.action_low, raw.action_high),
      reward: box(raw.reward_low, raw.reward_high),
      horizon: raw.horizon,
      reservoirs: raw.reservoirs,
    };
  }

  static async make(options: MakeOptions = {}): Promise<NileEnv> {
    const bridge = options.bridge ?? new Bridge();
    const ownsBridge = options.bridge === undefined;
    try {
      const raw = (await bridge.request("make", {
        config_path: options.configPath ?? null,
      })) as RawMake;
      return new NileEnv(bridge, ownsBridge, raw);
    } catch (error) {
      if (ownsBridge) await bridge.close();
      throw error;
    }
  }

  async reset(seed?: number): Promise<ResetResult> {
    this.assertOpen();
    const result = await this.bridge.request("reset", {
      env_id: this.envId,
      seed: seed ?? null,
    });
    return {
      observation: Float64Array.from(result.observation as number[]),
      info: result.info as Record<string, unknown>,
    };
  }

  async step(action: ArrayLike<number>): Promise<StepResult> {
    this.assertOpen();
    const values = Array.from(action, Number);
    const [dim] = this.spaces.action.shape;
    if (values.length !== dim) {
      throw new BridgeError(
        "UsageError",
        `action must have ${dim} components, got ${values.length}`,
      );
    }
    if (!values.every(Number.isFinite)) {
      throw new BridgeError("UsageError", "action values must be finite");
    }
    const result = await this.bridge.request("step", {
      env_id: this.envId,
      action: values,
    });
    return {
      observation: Float64Array.from(result.observation as number[]),
      reward: Float64Array.from(result.reward as number[]),
      terminated: result.terminated as boolean,
      truncated: result.truncated as boolean,
      info: result.info as Record<string, unknown>,
    };
  }

  /** Invalidates the handle; closes the bridge too when this handle owns it. */
  async close(): Promise<void> {
    if (this.envId < 0) return;
    const envId = this.envId;
    this.envId = -1;
    await this.bridge.request("close", { env_id: envId });
    if (this.ownsBridge) await this.bridge.close();
  }

  get isClosed(): boolean {
    return this.envId < 0;
  }

  private assertOpen(): void {
    if (this.envId < 0) {
      throw new BridgeError("UsageError", "environment handle is closed");
    }
  }
}

export interface ReplayResult {
  initialObservation: Float64Array;
  observations: Float64Array[];
  rewards: Float64Array[];
  truncateds: boolean[];
}

/**
 * Native one-shot rollout of a whole action sequence, used as the oracle for
 * cross-boundary parity: stepping the same actions through a handle must
 * reproduce these numbers.
 */
export async function replayEpisode(
  bridge: Bridge,
  options: { configPath?: string; seed?: number; actions: number[][] },
): Promise<ReplayResult> {
  const raw = await bridge.request("replay", {
    config_path: options.configPath ?? null,
    seed: options.seed ?? null,
    actions: options.actions,
  });
  return {
    initialObservation: Float64Array.from(raw.initial_observation as number[]),
    observations: (raw.observations as number[][]).map((row) =>
      Float64Array.from(row),
    ),
    rewards: (raw.rewards as number[][]).map((row) => Float64Array.from(row)),
    truncateds: raw.truncateds as boolean[],
  };
}
