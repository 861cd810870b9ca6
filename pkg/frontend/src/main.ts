// App controller: one session per tab, one in-flight request at a time,
// poll-on-revision refresh. Reloading the page resumes the session id
// from sessionStorage and rebuilds the identical view from the service.

import { ApiClient, ApiError, type SessionView } from './api.js'
import { renderError, renderPending, renderSession } from './view.js'

const SESSION_KEY = 'forge.session'

export class App {
  private view: SessionView | null = null
  private busy = false

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly storage: Pick<Storage, 'getItem' | 'setItem' | 'removeItem'>,
  ) {}

  async start(bundleId?: string): Promise<void> {
    const resume = this.storage.getItem(SESSION_KEY)
    if (resume) {
      try {
        this.view = await this.api.getView(resume)
        this.render()
        return
      } catch {
        this.storage.removeItem(SESSION_KEY)
      }
    }
    const bundles = await this.api.listBundles()
    const playable = bundles.filter((b) => b.playable)
    const chosen = bundleId
      ? playable.find((b) => b.bundle_id === bundleId)
      : playable[0]
    if (!chosen) {
      renderError(this.root, 'No playable bundles on this server.')
      return
    }
    const created = await this.api.createSession(chosen.bundle_id)
    this.storage.setItem(SESSION_KEY, created.session_id)
    this.view = created.view
    this.render()
  }

  get sessionId(): string | null {
    return this.view?.session_id ?? null
  }

  private render(): void {
    if (!this.view) return
    renderSession(this.root, this.view, {
      onSubmit: (text) => void this.submit(text),
      onHint: () => void this.hint(),
    })
  }

  /** Post an attempt, then refresh the view once the revision moves. */
  async submit(text: string): Promise<void> {
    if (!this.view || this.busy) return
    this.busy = true
    renderPending(this.root, text)
    try {
      const result = await this.api.submitAction(this.view.session_id, text)
      await this.refreshUntil(result.revision)
    } catch (error) {
      this.handleError(error, () => void this.submit(text))
    } finally {
      this.busy = false
    }
  }

  async hint(): Promise<void> {
    if (!this.view || this.busy) return
    this.busy = true
    try {
      const result = await this.api.requestHint(this.view.session_id)
      await this.refreshUntil(result.revision)
    } catch (error) {
      this.handleError(error, () => void this.hint())
    } finally {
      this.busy = false
    }
  }

  private async refreshUntil(revision: number): Promise<void> {
    if (!this.view) return
    let next = await this.api.getView(this.view.session_id)
    let tries = 0
    while (next.revision < revision && tries < 5) {
      await new Promise((resolve) => setTimeout(resolve, 150))
      next = await this.api.getView(this.view.session_id)
      tries += 1
    }
    this.view = next
    this.render()
  }

  private handleError(error: unknown, retry: () => void): void {
    if (error instanceof ApiError) {
      if (error.status === 422) {
        // The judge could not parse the attempt; show the nudge inline.
        this.render()
        renderError(this.root, error.detail)
        return
      }
      if (error.status === 409) {
        this.render()
        return
      }
    }
    renderError(this.root, 'Connection lost. The service may be down.', retry)
  }
}

function bootstrap(): void {
  const root = document.getElementById('app')
  if (!root) return
  const params = new URLSearchParams(window.location.search)
  const base = (window as unknown as { FORGE_BASE?: string }).FORGE_BASE ?? ''
  const app = new App(root as HTMLElement, new ApiClient(base), window.sessionStorage)
  void app.start(params.get('bundle') ?? undefined)
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  bootstrap()
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', bootstrap)
}
