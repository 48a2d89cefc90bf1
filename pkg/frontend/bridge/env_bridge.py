"""JSON-lines stdio server exposing the basin environment to other runtimes.

One request per stdin line, one response per stdout line. A request is
{"id": n, "op": name, ...payload}; the response is either
{"id": n, "ok": true, "result": ...} or
{"id": n, "ok": false, "error": {"type": ..., "message": ...}}.
The process exits when stdin closes. All dynamics stay on this side of the
boundary; the host only ships actions in and tuples out.
"""

import json
import sys

import numpy as np

from nile_momdp import NileEnv, load_config
from nile_momdp.errors import UsageError


def jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {key: jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    return value


class Server:
    """Holds live environments; one instance per bridge process."""

    def __init__(self):
        self._envs = {}
        self._next_id = 1

    def _env(self, payload):
        env = self._envs.get(payload.get("env_id"))
        if env is None:
            raise UsageError("unknown or closed environment handle")
        return env

    def _metadata(self, env, env_id):
        obs_lo, obs_hi = env.observation_bounds()
        act_lo, act_hi = env.action_bounds()
        rew_lo, rew_hi = env.reward_bounds()
        return {
            "env_id": env_id,
            "observation_low": obs_lo.tolist(),
            "observation_high": obs_hi.tolist(),
            "action_low": act_lo.tolist(),
            "action_high": act_hi.tolist(),
            "reward_low": rew_lo.tolist(),
            "reward_high": rew_hi.tolist(),
            "horizon": env.horizon,
            "reservoirs": [spec.name for spec in env.basin.reservoir_specs],
        }

    def op_make(self, payload):
        env = NileEnv(load_config(payload.get("config_path")))
        env_id = self._next_id
        self._next_id += 1
        self._envs[env_id] = env
        return self._metadata(env, env_id)

    def op_spaces(self, payload):
        env_id = payload.get("env_id")
        return self._metadata(self._env(payload), env_id)

    def op_reset(self, payload):
        env = self._env(payload)
        seed = payload.get("seed")
        observation, info = env.reset(seed=seed)
        info = dict(info)
        info.setdefault("seed", seed)
        return {"observation": observation.tolist(), "info": jsonable(info)}

    def op_step(self, payload):
        env = self._env(payload)
        action = np.asarray(payload.get("action"), dtype=float)
        observation, reward, terminated, truncated, info = env.step(action)
        return {
            "observation": observation.tolist(),
            "reward": reward.tolist(),
            "terminated": terminated,
            "truncated": truncated,
            "info": jsonable(info),
        }

    def op_replay(self, payload):
        """Run a whole action sequence natively in one call.

        This is the parity oracle: the same actions stepped one by one
        through the boundary must reproduce these numbers exactly.
        """
        env = NileEnv(load_config(payload.get("config_path")))
        observation, _ = env.reset(seed=payload.get("seed"))
        out = {
            "initial_observation": observation.tolist(),
            "observations": [],
            "rewards": [],
            "truncateds": [],
        }
        for action in payload.get("actions", []):
            observation, reward, _, truncated, _ = env.step(
                np.asarray(action, dtype=float))
            out["observations"].append(observation.tolist())
            out["rewards"].append(reward.tolist())
            out["truncateds"].append(truncated)
        return out

    def op_close(self, payload):
        self._env(payload)
        del self._envs[payload.get("env_id")]
        return {}


def main():
    server = Server()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        request_id = request.get("id")
        handler = getattr(server, f"op_{request.get('op', '')}", None)
        if handler is None:
            reply = {"id": request_id, "ok": False,
                     "error": {"type": "UsageError",
                               "message": f"unknown op {request.get('op')!r}"}}
        else:
            try:
                reply = {"id": request_id, "ok": True,
                         "result": handler(request)}
            except Exception as exc:
                reply = {"id": request_id, "ok": False,
                         "error": {"type": type(exc).__name__,
                                   "message": str(exc)}}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
