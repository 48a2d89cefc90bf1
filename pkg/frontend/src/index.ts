export { Bridge, BridgeError } from "./bridge.js";
export {
  NileEnv,
  replayEpisode,
  type BoxSpace,
  type EnvSpaces,
  type MakeOptions,
  type ReplayResult,
  type ResetResult,
  type StepResult,
} from "./env.js";
export {
  DEFAULT_ENV_ID,
  makeEnvironment,
  registerEnvironment,
  registeredEnvironments,
} from "./registry.js";
