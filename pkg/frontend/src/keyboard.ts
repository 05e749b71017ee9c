// Keyboard shortcuts: space toggles playback, arrows step one frame,
// S/E mark the event boundaries. Nothing fires while a form field has focus.

export type ShortcutAction =
  | "toggle-play"
  | "step-back"
  | "step-forward"
  | "mark-start"
  | "mark-end";

export type KeyEventLike = {
  key: string;
  code: string;
  altKey: boolean;
  ctrlKey: boolean;
  metaKey: boolean;
};

export type FocusTargetLike = {
  tagName?: string;
  isContentEditable?: boolean;
};

export function isTypingTarget(target: FocusTargetLike | null): boolean {
  if (!target) return false;
  if (target.isContentEditable) return true;
  const tag = (target.tagName ?? "").toUpperCase();
  return tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT";
}

export function resolveShortcut(event: KeyEventLike): ShortcutAction | null {
  if (event.altKey || event.ctrlKey || event.metaKey) return null;
  if (event.code === "Space") return "toggle-play";
  if (event.key === "ArrowLeft") return "step-back";
  if (event.key === "ArrowRight") return "step-forward";
  if (event.key.toLowerCase() === "s") return "mark-start";
  if (event.key.toLowerCase() === "e") return "mark-end";
  return null;
}

export function bindShortcuts(
  doc: Document,
  handler: (action: ShortcutAction) => void,
): () => void {
  const listener = (event: KeyboardEvent) => {
    if (isTypingTarget(event.target as FocusTargetLike | null)) return;
    const action = resolveShortcut(event);
    if (action) {
      event.preventDefault();
      handler(action);
    }
  };
  doc.addEventListener("keydown", listener);
  return () => doc.removeEventListener("keydown", listener);
}
