/** Entry point: `node dist/server.js [--port 8791]`. */

import { createApp } from "./app";

function portFromArgv(argv: string[]): number {
  const index = argv.indexOf("--port");
  if (index >= 0 && argv[index + 1] !== undefined) {
    const port = Number(argv[index + 1]);
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      throw new Error(`invalid port ${argv[index + 1]}`);
    }
    return port;
  }
  return 8791;
}

const port = portFromArgv(process.argv.slice(2));
const server = createApp().listen(port, () => {
  console.log(`scorer service listening on ${port}`);
});

process.on("SIGTERM", () => server.close(() => process.exit(0)));
process.on("SIGINT", () => server.close(() => process.exit(0)));
