/**
 * HTTP sidecar serving one pipeline stage over the published wire schema.
 *
 * Exactly one backend per server instance. Backend calls are single-flight
 * with a bounded queue; shed requests answer 503 with the retryable
 * "timeout" envelope code. A backend that fails to load leaves the server
 * up but degraded: /v1/health reports ready=false and stage requests return
 * the internal error envelope.
 */

import express from "express";
import type { Server } from "node:http";
import { ZodError } from "zod";

import { loadBackend, NoResultError, StageBackend } from "./backends.js";
import { BadPayloadError } from "./codec.js";
import { AdapterConfig } from "./config.js";
import { QueueFullError, SingleFlightQueue } from "./queue.js";
import { ErrorCode, HealthResponse } from "./schema.js";

const STAGE_PATHS = { detect: "/v1/detect", segment: "/v1/segment", grasp: "/v1/grasp" } as const;

function errorBody(code: ErrorCode, message: string) {
  return { error: { code, message } };
}

export function createApp(config: AdapterConfig, backend: StageBackend | null,
                          loadError?: string): express.Express {
  const app = express();
  app.use(express.json({ limit: "64mb" }));

  const queue = new SingleFlightQueue(config.queue_depth);

  app.get("/v1/health", (_req, res) => {
    const body: HealthResponse = {
      status: backend ? "ok" : "degraded",
      stage: config.stage,
      backend: config.backend,
      ready: backend !== null,
    };
    res.json(body);
  });

  app.post(STAGE_PATHS[config.stage], (req, res) => {
    queue
      .run(async () => {
        if (!backend) {
          throw new Error(`backend ${config.backend} failed to load: ${loadError}`);
        }
        return backend.handle(req.body);
      })
      .then((body) => res.json(body))
      .catch((e: unknown) => {
        if (e instanceof QueueFullError) {
          res.status(503).json(errorBody("timeout", e.message));
        } else if (e instanceof ZodError || e instanceof BadPayloadError) {
          res.status(400).json(errorBody("bad_request", e.message));
        } else if (e instanceof NoResultError) {
          res.status(404).json(errorBody("not_found", e.message));
        } else {
          res.status(500).json(errorBody("internal", e instanceof Error ? e.message : String(e)));
        }
      });
  });

  // the other stage endpoints exist in the schema but are not bound here
  for (const [stage, path] of Object.entries(STAGE_PATHS)) {
    if (stage !== config.stage) {
      app.post(path, (_req, res) => {
        res.status(404).json(errorBody("not_found", `no ${stage} backend bound to this server`));
      });
    }
  }

  app.use((_req, res) => {
    res.status(404).json(errorBody("not_found", "no such endpoint"));
  });

  // express's json parser rejects malformed bodies before our handlers run
  app.use((err: unknown, _req: express.Request, res: express.Response,
           _next: express.NextFunction) => {
    res.status(400).json(errorBody("bad_request",
      err instanceof Error ? err.message : "malformed request body"));
  });

  return app;
}

export interface AdapterHandle {
  server: Server;
  port: number;
  baseUrl: string;
  close(): Promise<void>;
}

export async function serveAdapter(config: AdapterConfig): Promise<AdapterHandle> {
  let backend: StageBackend | null = null;
  let loadError: string | undefined;
  try {
    backend = await loadBackend(config.backend, config.stage, config.options);
  } catch (e) {
    loadError = e instanceof Error ? e.message : String(e);
  }
  const app = createApp(config, backend, loadError);
  const server = await new Promise<Server>((resolve, reject) => {
    const s = app.listen(config.port, config.host, () => resolve(s));
    s.on("error", reject);
  });
  const address = server.address();
  const port = typeof address === "object" && address ? address.port : config.port;
  return {
    server,
    port,
    baseUrl: `http://${config.host}:${port}`,
    close: () => new Promise((resolve, reject) => {
      server.close((e) => (e ? reject(e) : resolve()));
      server.closeAllConnections(); // keep-alive sockets would stall close()
    }),
  };
}
