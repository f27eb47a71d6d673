// Wire-format types for the nearby HTTP API.

export interface Category {
  id: number;
  key: string;
  label: string;
  color: string;
}

export interface TextInfo {
  id: string;
  title: string;
  sentence_count: number;
  mean_tags: number;
  min_tags: number;
  max_tags: number;
}

export interface TextsResponse {
  schema_version: number;
  categories: Category[];
  texts: TextInfo[];
}

export interface TagDot {
  category_id: number;
  dx: number;
  dy: number;
  radius: number;
}

export interface GraphNode {
  sentence_id: string;
  anchor: number[];
  position: number[];
  ring_radius: number;
  tag_dots: TagDot[];
}

export interface GraphPayload {
  view: "graph";
  nodes: GraphNode[];
  edges: Record<string, [string, string][]>;
  bounds: number[];
  document_id: string;
  sentence_count: number;
}

export interface WaffleCell {
  category_id: number;
  x: number;
  y: number;
  size: number;
}

export interface WaffleBlock {
  sentence_id: string;
  x: number;
  y: number;
  width: number;
  height: number;
  cells: WaffleCell[];
}

export interface WafflePayload {
  view: "waffle";
  cell_size: number;
  width: number;
  height: number;
  rows: WaffleBlock[][];
  document_id: string;
  sentence_count: number;
}

export type Normalization = "raw-max" | "conditional";

export interface MatrixPayload {
  view: "matrix";
  order: number[];
  values: number[][];
  counts: number[][];
  normalization: Normalization;
  document_id: string;
  sentence_count: number;
}

export type LayoutPayload = GraphPayload | WafflePayload | MatrixPayload;

export interface SummaryEntry {
  category_id: number;
  count: number;
  proportion: number;
}

export interface SummaryPayload {
  document_id: string;
  sentence_count: number;
  per_category: SummaryEntry[];
}

export interface SentencePayload {
  document_id: string;
  sentence_id: string;
  index: number;
  text: string;
  tags: number[];
  combination_count: number;
}
