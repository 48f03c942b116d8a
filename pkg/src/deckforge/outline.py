"""Two-level outline tree: topics and sub-topics, with order and dirty flags."""

from dataclasses import dataclass, field, replace

from .errors import MalformedOutline, UnknownItem

TOPIC = "topic"
SUBTOPIC = "subtopic"


@dataclass
class OutlineItem:
    id: str
    text: str
    level: str  # topic | subtopic
    parent: str | None = None
    order: int = 0
    dirty: bool = False
    deleted: bool = False
    slide: str | None = None


@dataclass
class OutlineTree:
    items: dict[str, OutlineItem] = field(default_factory=dict)

    def validate(self) -> None:
        seen = set()
        for item in self.items.values():
            if item.id in seen:
                raise MalformedOutline(f"duplicate item id {item.id}")
            seen.add(item.id)
            if item.level == SUBTOPIC:
                parent = self.items.get(item.parent or "")
                if parent is None or parent.level != TOPIC:
                    raise MalformedOutline(f"sub-topic {item.id} has no parent topic")
            elif item.level == TOPIC:
                if item.parent is not None:
                    raise MalformedOutline(f"topic {item.id} must not have a parent")
            else:
                raise MalformedOutline(f"unknown level {item.level!r} on {item.id}")

    def get(self, item_id: str) -> OutlineItem:
        item = self.items.get(item_id)
        if item is None:
            raise UnknownItem(f"no outline item {item_id}")
        return item

    def topics(self, include_deleted: bool = False) -> list[OutlineItem]:
        topics = [
            i
            for i in self.items.values()
            if i.level == TOPIC and (include_deleted or not i.deleted)
        ]
        return sorted(topics, key=lambda i: i.order)

    def children(self, topic_id: str, include_deleted: bool = False) -> list[OutlineItem]:
        kids = [
            i
            for i in self.items.values()
            if i.parent == topic_id and (include_deleted or not i.deleted)
        ]
        return sorted(kids, key=lambda i: i.order)

    def depth_first(self, include_deleted: bool = False) -> list[OutlineItem]:
        out = []
        for topic in self.topics(include_deleted):
            out.append(topic)
            out.extend(self.children(topic.id, include_deleted))
        return out

    def childless_items(self, include_deleted: bool = False) -> list[OutlineItem]:
        """Lowest-level items in depth-first order: sub-topics, plus topics
        without (visible) children. These drive slide generation."""
        out = []
        for item in self.depth_first(include_deleted):
            if item.level == SUBTOPIC:
                out.append(item)
            elif not self.children(item.id, include_deleted):
                out.append(item)
        return out

    def renumber(self) -> None:
        for order, topic in enumerate(self.topics(include_deleted=True)):
            topic.order = order
            for child_order, child in enumerate(self.children(topic.id, include_deleted=True)):
                child.order = child_order

    def copy(self) -> "OutlineTree":
        return OutlineTree({item_id: replace(item) for item_id, item in self.items.items()})


def parse_outline_text(text: str, id_prefix: str = "o") -> OutlineTree:
    """Parse the plain-text outline format: an unindented line is a topic, a
    line indented by exactly two spaces is a sub-topic, blank lines ignored."""
    tree = OutlineTree()
    current_topic: OutlineItem | None = None
    counter = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("  ") and not line.startswith("   "):
            if current_topic is None:
                raise MalformedOutline(f"line {lineno}: sub-topic before any topic")
            item = OutlineItem(
                id=f"{id_prefix}{counter}",
                text=line[2:].strip(),
                level=SUBTOPIC,
                parent=current_topic.id,
                order=len(tree.children(current_topic.id)),
            )
        elif line.startswith(" "):
            raise MalformedOutline(f"line {lineno}: indentation must be exactly two spaces")
        else:
            item = OutlineItem(
                id=f"{id_prefix}{counter}",
                text=line.strip(),
                level=TOPIC,
                order=len(tree.topics()),
            )
            current_topic = item
        tree.items[item.id] = item
        counter += 1
    tree.validate()
    return tree


def serialize_outline_text(tree: OutlineTree) -> str:
    lines = []
    for item in tree.depth_first():
        indent = "  " if item.level == SUBTOPIC else ""
        lines.append(indent + item.text)
    return "\n".join(lines) + ("\n" if lines else "")
