import { NileEnv, type MakeOptions } from "./env.js";

/** Default environment id, resolving to the packaged basin configuration. */
export const DEFAULT_ENV_ID = "NileBasin-v0";

const registry = new Map<string, MakeOptions>([[DEFAULT_ENV_ID, {}]]);

/** Registers (or re-registers) an id to construction options. */
export function registerEnvironment(id: string, options: MakeOptions): void {
  registry.set(id, options);
}

export function registeredEnvironments(): string[] {
  return [...registry.keys()];
}

/** Entry point mirroring the usual `make(id)` convention. */
export function makeEnvironment(
  id: string = DEFAULT_ENV_ID,
  overrides: MakeOptions = {},
): Promise<NileEnv> {
  const options = registry.get(id);
  if (options === undefined) {
    throw new Error(`unknown environment id ${JSON.stringify(id)}`);
  }
  return NileEnv.make({ ...options, ...overrides });
}
