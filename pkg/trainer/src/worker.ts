/** Entry point: serve the evaluation protocol on stdin/stdout. */

import { handleEvaluate } from "./model";
import { serveProtocol } from "./protocol";

serveProtocol(handleEvaluate)
  .then(() => process.exit(0))
  .catch((err) => {
    process.stderr.write(`worker fatal: ${err?.stack ?? err}\n`);
    process.exit(1);
  });
