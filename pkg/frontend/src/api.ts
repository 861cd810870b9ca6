// Typed client for the play-service JSON API. No business logic here:
// legality, progress and hints all come from the service.

export interface BundleInfo {
  bundle_id: string
  scene: string
  steps: number
  playable: boolean
  has_image: boolean
}

export interface FeedbackView {
  verdict: 'accepted' | 'rejected_illegal' | 'rejected_offpath'
  message: string
  hint: string | null
  escaped: boolean
}

export interface HistoryEntry {
  attempt: string
  feedback: FeedbackView
}

export interface SessionView {
  session_id: string
  bundle_id: string
  scene: string
  description: string
  progress: number
  total_steps: number
  progress_fraction: number
  hint_level: number
  escaped: boolean
  revision: number
  history: HistoryEntry[]
  image_url: string
  layout_url: string
}

export interface ActionResult extends FeedbackView {
  revision: number
  progress: number
}

export class ApiError extends Error {
  status: number
  detail: string

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`)
    this.status = status
    this.detail = detail
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText
    try {
      const data = await response.json()
      detail = typeof data.detail === 'string' ? data.detail : JSON.stringify(data.detail)
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail)
  }
  return (await response.json()) as T
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  private url(path: string): string {
    return this.base + path
  }

  async listBundles(): Promise<BundleInfo[]> {
    const data = await asJson<{ bundles: BundleInfo[] }>(await fetch(this.url('/bundles')))
    return data.bundles
  }

  async createSession(bundleId: string): Promise<{ session_id: string; view: SessionView }> {
    return asJson(await fetch(this.url(`/bundles/${bundleId}/sessions`), { method: 'POST' }))
  }

  async getView(sessionId: string): Promise<SessionView> {
    return asJson(await fetch(this.url(`/sessions/${sessionId}`)))
  }

  async submitAction(sessionId: string, text: string): Promise<ActionResult> {
    return asJson(
      await fetch(this.url(`/sessions/${sessionId}/actions`), {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ text }),
      }),
    )
  }

  async requestHint(sessionId: string): Promise<ActionResult> {
    return asJson(await fetch(this.url(`/sessions/${sessionId}/hint`), { method: 'POST' }))
  }
}
