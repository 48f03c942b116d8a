// JSON shapes of the deckforge HTTP API.

export type OverviewCard = {
  cell_id: string;
  keywords: string[];
  content_weight: number;
};

export type OutlineItem = {
  id: string;
  text: string;
  level: "topic" | "subtopic";
  parent: string | null;
  order: number;
  dirty: boolean;
  deleted: boolean;
  slide: string | null;
};

export type Outline = {
  items: OutlineItem[];
};

export type Bullet = {
  text: string;
  source_cell: string;
  relevance: number;
  manually_edited: boolean;
};

export type MediaRef = {
  kind: "chart" | "table";
  origin_cell: string;
  payload_b64?: string;
  table_text?: string;
};

export type Slide = {
  id: string;
  title: string;
  bullets: Bullet[];
  media: MediaRef[];
  template: "title" | "one_column" | "two_column";
  deleted: boolean;
  bound_cells: string[];
  manual_cells: string[];
};

export type SessionView = {
  session_id: string;
  revision: number;
  outline: Outline;
  deck: Slide[];
  params: GenerationParams;
  warnings: SessionWarning[];
};

export type SessionWarning = {
  code: string;
  item_id?: string;
  item_text?: string;
};

export type GenerationParams = {
  top_k: number;
  detail_level: "concise" | "detailed";
  page_numbers: boolean;
};

export type OutlineDiff = {
  added: string[];
  modified: string[];
  reordered: string[];
  deleted: string[];
  dirty: string[];
};

export type LinkedCell = {
  cell_id: string;
  index: number;
  score: number;
};

export type Linkage = {
  item_id: string | null;
  item_text: string | null;
  slide_id: string | null;
  cells: LinkedCell[];
  scroll_cell_index: number | null;
};

export type ApiError = {
  error: string;
  detail: string;
};
