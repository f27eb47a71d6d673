// Typed client for the nearby HTTP API with request cancellation.

import type {
  LayoutPayload,
  SentencePayload,
  SummaryPayload,
  TextsResponse,
} from "./types.js";
import type { PanelState } from "./state.js";
import { layoutRequestBody, summaryQuery } from "./state.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let code = "http-error";
    let message = `request failed with status ${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.code === "string") code = body.code;
      if (body && typeof body.message === "string") message = body.message;
    } catch {
      // keep defaults for non-JSON error bodies
    }
    throw new ApiError(response.status, code, message);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async texts(): Promise<TextsResponse> {
    return parseOrThrow(await fetch(`${this.baseUrl}/api/texts`));
  }

  async layout(
    documentId: string,
    state: PanelState,
    signal?: AbortSignal,
  ): Promise<LayoutPayload> {
    const response = await fetch(
      `${this.baseUrl}/api/texts/${encodeURIComponent(documentId)}/layout`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(layoutRequestBody(state)),
        signal,
      },
    );
    return parseOrThrow(response);
  }

  async summary(
    documentId: string,
    state: PanelState,
    signal?: AbortSignal,
  ): Promise<SummaryPayload> {
    const query = summaryQuery(state);
    const url = `${this.baseUrl}/api/texts/${encodeURIComponent(documentId)}/summary${
      query ? `?${query}` : ""
    }`;
    return parseOrThrow(await fetch(url, { signal }));
  }

  async sentence(
    documentId: string,
    sentenceId: string,
    signal?: AbortSignal,
  ): Promise<SentencePayload> {
    const url = `${this.baseUrl}/api/texts/${encodeURIComponent(
      documentId,
    )}/sentences/${encodeURIComponent(sentenceId)}`;
    return parseOrThrow(await fetch(url, { signal }));
  }
}
