/** Server-authoritative span rendering.
 *
 * Served offsets count Unicode code points (the server's string
 * indexing), so they are mapped onto UTF-16 positions before slicing;
 * which characters are highlighted never changes client-side. Valid
 * spans are wrapped exactly as served; anything malformed falls back to
 * unstyled text plus a warning marker so the entry stays reviewable.
 */

export interface CharSpan {
  char_start: number;
  char_end: number;
}

export interface RenderResult {
  fragment: DocumentFragment;
  warning: boolean;
}

/** UTF-16 index of each code-point boundary, plus the total length. */
function codePointIndex(text: string): number[] {
  const bounds: number[] = [0];
  for (const ch of text) {
    bounds.push((bounds[bounds.length - 1] ?? 0) + ch.length);
  }
  return bounds;
}

/** Spans must be in-bounds, ascending, non-overlapping, and non-empty. */
export function spansValid(text: string, spans: readonly CharSpan[]): boolean {
  const pointCount = codePointIndex(text).length - 1;
  let previousEnd = 0;
  for (const span of spans) {
    if (!Number.isInteger(span.char_start) || !Number.isInteger(span.char_end)) return false;
    if (span.char_start < previousEnd) return false;
    if (span.char_end <= span.char_start) return false;
    if (span.char_end > pointCount) return false;
    previousEnd = span.char_end;
  }
  return true;
}

export function renderHighlighted(text: string, spans: readonly CharSpan[]): RenderResult {
  const fragment = document.createDocumentFragment();
  if (!spansValid(text, spans)) {
    fragment.appendChild(document.createTextNode(text));
    return { fragment, warning: true };
  }
  const bounds = codePointIndex(text);
  const at = (pointIndex: number): number => bounds[pointIndex] ?? text.length;
  let cursor = 0;
  for (const span of spans) {
    if (span.char_start > cursor) {
      fragment.appendChild(document.createTextNode(text.slice(at(cursor), at(span.char_start))));
    }
    const mark = document.createElement("mark");
    mark.className = "hl";
    mark.textContent = text.slice(at(span.char_start), at(span.char_end));
    fragment.appendChild(mark);
    cursor = span.char_end;
  }
  if (at(cursor) < text.length) {
    fragment.appendChild(document.createTextNode(text.slice(at(cursor))));
  }
  return { fragment, warning: false };
}

/** Read back the highlighted code-point ranges from a rendered container. */
export function extractMarkedRanges(container: ParentNode & Node): CharSpan[] {
  const ranges: CharSpan[] = [];
  let offset = 0;
  const walk = (node: Node): void => {
    if (node.nodeType === node.TEXT_NODE) {
      offset += Array.from(node.textContent ?? "").length;
      return;
    }
    const isMark = node instanceof Element && node.tagName === "MARK";
    const start = offset;
    node.childNodes.forEach(walk);
    if (isMark) ranges.push({ char_start: start, char_end: offset });
  };
  container.childNodes.forEach(walk);
  return ranges;
}
