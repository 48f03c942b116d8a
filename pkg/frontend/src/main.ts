// DOM wiring for the three panels: Notebook Overview, Outline, Slides.
// All state lives in EditorController; this file only renders and forwards
// events. Served alongside the deckforge HTTP API (same origin).

import { HttpApi } from "./api";
import { EditorController } from "./controller";
import { renderMarkdownInline } from "./markdown";
import type { OutlineItem, Slide } from "./types";

const DOT_COLORS = { gray: "#9e9e9e", blue: "#1e88e5", pink: "#ec407a" } as const;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node;
}

function renderOverview(controller: EditorController, root: HTMLElement): void {
  root.replaceChildren();
  for (const card of controller.cards) {
    const box = el("div", "card");
    box.dataset.cellId = card.cell_id;

    const dot = el("span", "dot");
    dot.style.background = DOT_COLORS[controller.dotColor(card.cell_id)];
    box.appendChild(dot);

    const bar = el("div", "relevance-bar");
    bar.style.width = `${controller.barWidth(card.cell_id)}%`;
    box.appendChild(bar);

    box.appendChild(el("span", "keywords", card.keywords.join(", ")));
    box.title = `cell ${card.cell_id}`;

    box.addEventListener("click", () => void controller.selectRef(card.cell_id));
    box.addEventListener("dblclick", () => void controller.cardDoubleClick(card.cell_id));
    box.addEventListener("mouseenter", () => controller.focusCell(card.cell_id));
    box.addEventListener("mouseleave", () => controller.focusCell(null));
    root.appendChild(box);
  }
}

function renderOutlineItem(controller: EditorController, item: OutlineItem): HTMLElement {
  const row = el("div", `outline-item level-${item.level}`);
  row.dataset.itemId = item.id;
  if (item.dirty) {
    row.classList.add("dirty"); // pink styling
  }
  row.draggable = true;

  const input = el("input") as HTMLInputElement;
  input.value = item.text;
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      event.preventDefault();
      void controller.outlineEnter(item.id);
    } else if (event.key === " " && input.value.trim() === "") {
      event.preventDefault();
      void controller.outlineSpace(item.id);
    }
  });
  input.addEventListener("focus", () => void controller.selectRef(item.id));
  row.appendChild(input);

  const pending = controller.pendingRecommendations;
  if (pending && pending.itemId === item.id) {
    const list = el("ul", "recommendations");
    for (const topic of pending.topics) {
      const choice = el("li", "", topic);
      choice.addEventListener("click", () => void controller.chooseRecommendation(item.id, topic));
      list.appendChild(choice);
    }
    row.appendChild(list);
  }
  return row;
}

function renderOutline(controller: EditorController, root: HTMLElement): void {
  root.replaceChildren();
  const items = controller.visibleOutline();
  items.forEach((item, index) => {
    const row = renderOutlineItem(controller, item);
    row.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/plain", item.id);
    });
    row.addEventListener("dragover", (event) => event.preventDefault());
    row.addEventListener("drop", (event) => {
      event.preventDefault();
      const dragged = event.dataTransfer?.getData("text/plain");
      if (dragged && dragged !== item.id) {
        void controller.dragItem(dragged, index);
      }
    });
    root.appendChild(row);
  });
}

function renderSlide(controller: EditorController, slide: Slide): HTMLElement {
  const frame = el("div", "slide");
  frame.dataset.slideId = slide.id;
  if (controller.selectedSlideId() === slide.id) {
    frame.classList.add("selected");
  }
  frame.addEventListener("click", () => void controller.selectRef(slide.id));

  frame.appendChild(el("h3", "slide-title", slide.title));

  const bullets = el("ul", "bullets");
  slide.bullets.forEach((bullet, index) => {
    const li = el("li");
    li.innerHTML = renderMarkdownInline(bullet.text);
    li.addEventListener("dblclick", () => {
      const text = window.prompt("Edit bullet", bullet.text);
      if (text !== null) {
        void controller.editSlide(slide.id, { kind: "edit_bullet", index, text });
      }
    });
    bullets.appendChild(li);
  });
  frame.appendChild(bullets);

  const toolbar = el("div", "slide-toolbar");
  const template = el("select") as HTMLSelectElement;
  for (const name of ["title", "one_column", "two_column"] as const) {
    const option = el("option", "", name) as HTMLOptionElement;
    option.value = name;
    option.selected = slide.template === name;
    template.appendChild(option);
  }
  template.addEventListener("change", () => {
    void controller.editSlide(slide.id, {
      kind: "set_template",
      template: template.value as Slide["template"],
    });
  });
  toolbar.appendChild(template);

  const remove = el("button", "", "Delete");
  remove.addEventListener("click", (event) => {
    event.stopPropagation();
    void controller.editSlide(slide.id, { kind: "delete" });
  });
  toolbar.appendChild(remove);
  frame.appendChild(toolbar);
  return frame;
}

function renderSlides(controller: EditorController, root: HTMLElement): void {
  root.replaceChildren();
  for (const slide of controller.visibleDeck()) {
    root.appendChild(renderSlide(controller, slide));
  }
  const generate = el("button", "generate", "Generate slides");
  generate.addEventListener("click", () => void controller.generateDeck());
  root.appendChild(generate);
}

function showToast(message: string): void {
  const toast = el("div", "toast", message);
  document.body.appendChild(toast);
  setTimeout(() => toast.remove(), 4000);
}

export async function boot(sessionId: string): Promise<EditorController> {
  const api = new HttpApi("");
  const controller = new EditorController(api, sessionId, {
    onRender: () => {
      renderOverview(controller, byId("overview-panel"));
      renderOutline(controller, byId("outline-panel"));
      renderSlides(controller, byId("slides-panel"));
    },
    onHint: showToast,
    onError: (code, detail) => showToast(`${code}: ${detail}`),
  });
  await controller.load();
  return controller;
}
