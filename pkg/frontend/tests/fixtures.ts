import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type {
  GraphPayload,
  MatrixPayload,
  SentencePayload,
  SummaryPayload,
  TextsResponse,
  WafflePayload,
} from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

// Real payloads captured from the backend service over its HTTP API.
export const texts = load<TextsResponse>("texts.json");
export const graph = load<GraphPayload>("graph.json");
export const waffle = load<WafflePayload>("waffle.json");
export const matrix = load<MatrixPayload>("matrix.json");
export const matrixConditional = load<MatrixPayload>("matrix_conditional.json");
export const summary = load<SummaryPayload>("summary.json");
export const sentence = load<SentencePayload>("sentence.json");
