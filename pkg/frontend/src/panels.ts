// One in-flight request per panel; stale responses are discarded by
// comparing sequence numbers taken when the request started.

import { ApiError, ApiUnreachable } from "./api";

export class Panel {
  readonly root: HTMLElement;
  private body: HTMLElement;
  private status: HTMLElement;
  private seq = 0;
  private retry: (() => void) | null = null;

  constructor(title: string, className: string) {
    this.root = document.createElement("section");
    this.root.className = `panel ${className}`;
    const heading = document.createElement("h2");
    heading.textContent = title;
    this.status = document.createElement("div");
    this.status.className = "panel-status";
    this.body = document.createElement("div");
    this.body.className = "panel-body";
    this.root.append(heading, this.status, this.body);
  }

  async load<T>(fetcher: () => Promise<T>, render: (data: T) => Node): Promise<void> {
    const mySeq = ++this.seq;
    this.status.textContent = "loading…";
    this.status.className = "panel-status loading";
    this.retry = () => void this.load(fetcher, render);
    try {
      const data = await fetcher();
      if (mySeq !== this.seq) return; // a newer request superseded this one
      this.status.textContent = "";
      this.status.className = "panel-status";
      this.body.replaceChildren(render(data));
    } catch (err) {
      if (mySeq !== this.seq) return;
      this.body.replaceChildren();
      if (err instanceof ApiUnreachable) {
        this.showRetryBanner("API unreachable");
      } else if (err instanceof ApiError) {
        this.status.textContent = `request rejected: ${err.detail}`;
        this.status.className = "panel-status error";
      } else {
        this.status.textContent = `error: ${String(err)}`;
        this.status.className = "panel-status error";
      }
    }
  }

  private showRetryBanner(message: string): void {
    this.status.replaceChildren();
    this.status.className = "panel-status banner";
    const text = document.createElement("span");
    text.textContent = `${message} — `;
    const button = document.createElement("button");
    button.type = "button";
    button.className = "retry";
    button.textContent = "retry";
    button.addEventListener("click", () => this.retry?.());
    this.status.append(text, button);
  }
}
