import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface, type Interface } from "node:readline";
import { fileURLToPath } from "node:url";

const BRIDGE_SCRIPT = fileURLToPath(
  new URL("../bridge/env_bridge.py", import.meta.url),
);

/** Error relayed from the Python side, keeping its native type name. */
export class BridgeError extends Error {
  constructor(
    readonly kind: string,
    message: string,
  ) {
    super(message);
    this.name = "BridgeError";
  }
}

interface Pending {
  resolve(value: unknown): void;
  reject(error: Error): void;
}

/**
 * One Python process speaking JSON lines over stdio. Many environments can
 * live behind a single bridge; requests are matched to replies by id.
 */
export class Bridge {
  private readonly proc: ChildProcessWithoutNullStreams;
  private readonly lines: Interface;
  private readonly pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;
  private stderrTail = "";

  constructor(python: string = process.env.NILE_BRIDGE_PYTHON ?? "python3") {
    this.proc = spawn(python, [BRIDGE_SCRIPT], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    this.lines = createInterface({ input: this.proc.stdout });
    this.lines.on("line", (line) => this.dispatch(line));
    this.proc.stderr.on("data", (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString()).slice(-4000);
    });
    this.proc.on("exit", () => {
      this.closed = true;
      const reason = new BridgeError(
        "BridgeClosed",
        `bridge process exited${this.stderrTail ? `: ${this.stderrTail}` : ""}`,
      );
      for (const pending of this.pending.values()) pending.reject(reason);
      this.pending.clear();
    });
  }

  request(op: string, payload: Record<string, unknown> = {}): Promise<any> {
    if (this.closed) {
      return Promise.reject(new BridgeError("BridgeClosed", "bridge is closed"));
    }
    const id = this.nextId++;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin.write(`${JSON.stringify({ id, op, ...payload })}\n`);
    });
  }

  private dispatch(line: string): void {
    const reply = JSON.parse(line) as {
      id: number;
      ok: boolean;
      result?: unknown;
      error?: { type: string; message: string };
    };
    const pending = this.pending.get(reply.id);
    if (!pending) return;
    this.pending.delete(reply.id);
    if (reply.ok) {
      pending.resolve(reply.result);
    } else {
      pending.reject(
        new BridgeError(reply.error?.type ?? "Error", reply.error?.message ?? ""),
      );
    }
  }

  /** Ends stdin; the Python side exits on EOF. */
  close(): Promise<void> {
    if (this.closed) return Promise.resolve();
    this.closed = true;
    return new Promise((resolve) => {
      this.proc.once("exit", () => resolve());
      this.proc.stdin.end();
    });
  }
}
