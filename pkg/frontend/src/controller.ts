import type { Api } from "./api";
import { ApiRequestError } from "./api";
import type {
  GenerationParams,
  Linkage,
  OutlineItem,
  OverviewCard,
  Slide,
} from "./types";

export type DotColor = "gray" | "blue" | "pink";

export type HighlightSet = {
  itemId: string | null;
  slideId: string | null;
  cells: Map<string, number>; // cell id -> relevance score
  scrollCellIndex: number | null;
};

export type RecommendationState = {
  itemId: string;
  topics: string[];
};

export type ControllerEvents = {
  onRender?: () => void;
  onHint?: (message: string) => void;
  onError?: (code: string, detail: string) => void;
};

function emptyHighlight(): HighlightSet {
  return { itemId: null, slideId: null, cells: new Map(), scrollCellIndex: null };
}

let clientIdCounter = 0;

function nextClientId(): string {
  clientIdCounter += 1;
  return `ui${clientIdCounter}`;
}

// Drives the three panels. Holds no authoritative state: every mutation goes
// through the API and the view is re-fetched on success, so a reload lands on
// the identical view. Mutations are serialized (one in flight, rest queue).
export class EditorController {
  cards: OverviewCard[] = [];
  outline: OutlineItem[] = [];
  deck: Slide[] = [];
  revision = 0;
  params: GenerationParams = { top_k: 3, detail_level: "concise", page_numbers: false };

  highlight: HighlightSet = emptyHighlight();
  focusedCellId: string | null = null;
  pendingRecommendations: RecommendationState | null = null;

  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly api: Api,
    readonly sessionId: string,
    private readonly events: ControllerEvents = {},
  ) {}

  // -- state loading -------------------------------------------------------

  async load(): Promise<void> {
    const [session, overview] = await Promise.all([
      this.api.getSession(this.sessionId),
      this.api.getOverview(this.sessionId),
    ]);
    this.revision = session.revision;
    this.outline = session.outline.items;
    this.deck = session.deck;
    this.params = session.params;
    this.cards = overview.cards;
    this.events.onRender?.();
  }

  private async refresh(): Promise<void> {
    const session = await this.api.getSession(this.sessionId);
    this.revision = session.revision;
    this.outline = session.outline.items;
    this.deck = session.deck;
    this.params = session.params;
    this.events.onRender?.();
  }

  // -- derived view --------------------------------------------------------

  visibleDeck(): Slide[] {
    return this.deck.filter((s) => !s.deleted);
  }

  visibleOutline(): OutlineItem[] {
    const topics = this.outline
      .filter((i) => i.level === "topic" && !i.deleted)
      .sort((a, b) => a.order - b.order);
    const result: OutlineItem[] = [];
    for (const topic of topics) {
      result.push(topic);
      const children = this.outline
        .filter((i) => i.parent === topic.id && !i.deleted)
        .sort((a, b) => a.order - b.order);
      result.push(...children);
    }
    return result;
  }

  selectedSlideId(): string | null {
    return this.highlight.slideId;
  }

  dotColor(cellId: string): DotColor {
    if (this.highlight.cells.has(cellId)) {
      return "pink";
    }
    if (this.focusedCellId === cellId) {
      return "blue";
    }
    return "gray";
  }

  // Relevance bar width in percent: proportional to the linkage score.
  barWidth(cellId: string): number {
    const score = this.highlight.cells.get(cellId);
    return score === undefined ? 0 : Math.round(score * 100);
  }

  dirtyItemIds(): Set<string> {
    return new Set(this.outline.filter((i) => i.dirty && !i.deleted).map((i) => i.id));
  }

  focusCell(cellId: string | null): void {
    this.focusedCellId = cellId;
    this.events.onRender?.();
  }

  // -- mutation queue ------------------------------------------------------

  private enqueue<T>(action: () => Promise<T>): Promise<T> {
    const next = this.queue.then(action, action);
    this.queue = next.then(
      () => undefined,
      () => undefined,
    );
    return next;
  }

  private reportError(error: unknown): void {
    if (error instanceof ApiRequestError) {
      this.events.onError?.(error.code, error.message);
    } else {
      this.events.onError?.("UnknownError", String(error));
    }
  }

  // -- cross-panel focus ---------------------------------------------------

  async selectRef(ref: string): Promise<HighlightSet> {
    let linkage: Linkage;
    try {
      linkage = await this.api.linkage(this.sessionId, ref);
    } catch (error) {
      this.highlight = emptyHighlight();
      this.events.onRender?.();
      this.reportError(error);
      return this.highlight;
    }
    this.highlight = {
      itemId: linkage.item_id,
      slideId: linkage.slide_id,
      cells: new Map(linkage.cells.map((c) => [c.cell_id, c.score])),
      scrollCellIndex: linkage.scroll_cell_index,
    };
    this.events.onRender?.();
    return this.highlight;
  }

  // -- overview panel ------------------------------------------------------

  async cardDoubleClick(cellId: string): Promise<void> {
    const slideId = this.highlight.slideId;
    if (slideId === null) {
      this.events.onHint?.("Select an outline item or slide first.");
      return;
    }
    const slide = this.deck.find((s) => s.id === slideId);
    const mode = slide && slide.bound_cells.includes(cellId) ? "unbind" : "bind";
    await this.enqueue(async () => {
      try {
        await this.api.bindCells(this.sessionId, slideId, [cellId], mode);
        await this.refresh();
        await this.selectRef(slideId);
      } catch (error) {
        this.reportError(error);
      }
    });
  }

  // -- outline panel -------------------------------------------------------

  private outlinePayload(items: OutlineItem[]) {
    return { items: items.map((i) => ({ ...i })) };
  }

  async outlineEnter(itemId: string): Promise<string | null> {
    const current = this.outline.find((i) => i.id === itemId);
    if (!current) {
      return null;
    }
    const fresh: OutlineItem = {
      id: nextClientId(),
      text: "",
      level: current.level,
      parent: current.parent,
      order: current.order + 1,
      dirty: false,
      deleted: false,
      slide: null,
    };
    const items = this.outline.map((i) => ({ ...i }));
    for (const item of items) {
      if (item.level === current.level && item.parent === current.parent && item.order > current.order) {
        item.order += 1;
      }
    }
    items.push(fresh);
    return this.enqueue(async () => {
      try {
        await this.api.putOutline(this.sessionId, this.outlinePayload(items));
        await this.refresh();
        return fresh.id;
      } catch (error) {
        this.reportError(error);
        return null;
      }
    });
  }

  async outlineSpace(itemId: string): Promise<string[]> {
    const item = this.outline.find((i) => i.id === itemId);
    if (!item || item.text.trim() !== "") {
      return [];
    }
    try {
      const { topics } = await this.api.recommend(this.sessionId, itemId);
      this.pendingRecommendations = { itemId, topics };
      this.events.onRender?.();
      return topics;
    } catch (error) {
      this.pendingRecommendations = null;
      this.reportError(error);
      return [];
    }
  }

  async chooseRecommendation(itemId: string, text: string): Promise<void> {
    const items = this.outline.map((i) => (i.id === itemId ? { ...i, text } : { ...i }));
    this.pendingRecommendations = null;
    await this.enqueue(async () => {
      try {
        await this.api.putOutline(this.sessionId, this.outlinePayload(items));
        await this.refresh();
      } catch (error) {
        this.reportError(error);
      }
    });
  }

  async dragItem(itemId: string, toIndex: number): Promise<void> {
    const moving = this.outline.find((i) => i.id === itemId);
    if (!moving) {
      return;
    }
    const siblings = this.outline
      .filter((i) => i.level === moving.level && i.parent === moving.parent && !i.deleted)
      .sort((a, b) => a.order - b.order);
    const from = siblings.findIndex((i) => i.id === itemId);
    const bounded = Math.max(0, Math.min(toIndex, siblings.length - 1));
    if (from < 0 || from === bounded) {
      return;
    }
    siblings.splice(bounded, 0, ...siblings.splice(from, 1));
    const orders = new Map(siblings.map((i, index) => [i.id, index]));
    const items = this.outline.map((i) => ({ ...i, order: orders.get(i.id) ?? i.order }));
    await this.enqueue(async () => {
      try {
        await this.api.putOutline(this.sessionId, this.outlinePayload(items));
        await this.refresh();
      } catch (error) {
        this.reportError(error);
      }
    });
  }

  // -- slides panel --------------------------------------------------------

  async generateDeck(): Promise<void> {
    await this.enqueue(async () => {
      try {
        await this.api.generate(this.sessionId, this.params);
        await this.refresh();
      } catch (error) {
        this.reportError(error);
      }
    });
  }

  async editSlide(slideId: string, edit: import("./api").SlideEdit): Promise<void> {
    await this.enqueue(async () => {
      try {
        await this.api.editSlide(this.sessionId, slideId, edit);
        await this.refresh();
      } catch (error) {
        this.reportError(error);
      }
    });
  }

  // Stable snapshot of everything the panels render; used to prove
  // reload-safety (snapshot after mutations == snapshot of a fresh load).
  viewSnapshot(): unknown {
    return {
      revision: this.revision,
      cards: this.cards,
      outline: this.visibleOutline().map((i) => ({
        id: i.id,
        text: i.text,
        level: i.level,
        dirty: i.dirty,
        slide: i.slide,
      })),
      deck: this.visibleDeck().map((s) => ({
        id: s.id,
        title: s.title,
        template: s.template,
        bullets: s.bullets,
        bound: [...s.bound_cells].sort(),
      })),
      params: this.params,
    };
  }
}
