/** Minimal document stub: just enough DOM for the pure render functions. */

export class StubElement {
  children: StubElement[] = [];
  style: Record<string, string> = {};
  attributes: Record<string, string> = {};
  className = "";
  textContent = "";
  title = "";

  constructor(public tagName: string) {}

  appendChild(child: StubElement): StubElement {
    this.children.push(child);
    return child;
  }

  setAttribute(name: string, value: string): void {
    this.attributes[name] = value;
  }

  /** Depth-first flatten, handy for assertions. */
  all(): StubElement[] {
    return [this, ...this.children.flatMap((c) => c.all())];
  }

  find(predicate: (el: StubElement) => boolean): StubElement[] {
    return this.all().filter(predicate);
  }

  text(): string {
    return this.all()
      .map((el) => el.textContent)
      .filter(Boolean)
      .join(" ");
  }
}

export function installStubDocument(): void {
  (globalThis as { document?: unknown }).document = {
    createElement: (tag: string) => new StubElement(tag),
  };
}
