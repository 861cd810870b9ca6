// End-to-end against the scripted service: the classroom session accepts
// all five official steps, renders five accepted bubbles and the victory
// banner, and a reload reconstructs the identical history.

// @vitest-environment jsdom

import { beforeEach, describe, expect, it, vi } from 'vitest'

import { ApiClient } from '../src/api.js'
import { App } from '../src/main.js'
import { renderSession } from '../src/view.js'
import { MemoryStorage, loadContract, scriptedService } from './scripted_service'

const contract = loadContract()

function officialGlosses(): string[] {
  return contract.entries
    .filter((e) => e.method === 'POST' && e.path.endsWith('/actions'))
    .map((e) => (e.body as { text: string }).text)
}

function finalView() {
  const views = contract.entries.filter((e) => e.method === 'GET' && e.path.startsWith('/sessions/'))
  return views[views.length - 1].response as never
}

describe('play UI against the scripted service', () => {
  let root: HTMLElement

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>'
    root = document.getElementById('app') as HTMLElement
  })

  it('plays the five official steps to victory', async () => {
    const service = scriptedService(loadContract())
    vi.stubGlobal('fetch', service.fetch)
    const storage = new MemoryStorage()
    const app = new App(root, new ApiClient(''), storage)

    await app.start('classroom')
    expect(app.sessionId).toBe(contract.session_id)
    expect(root.querySelectorAll('.bubble').length).toBe(0)
    expect(root.querySelector('.banner.victory')).toBeNull()

    for (const gloss of officialGlosses()) {
      await app.submit(gloss)
    }

    const accepted = root.querySelectorAll('.bubble.feedback.accepted')
    expect(accepted.length).toBe(5)
    expect(root.querySelectorAll('.bubble.attempt').length).toBe(5)
    expect(root.querySelector('.banner.victory')).not.toBeNull()
    const input = root.querySelector('.attempt-input') as HTMLInputElement
    expect(input.disabled).toBe(true)
    expect(service.unmatched).toEqual([])
    vi.unstubAllGlobals()
  })

  it('reconstructs identical history after a reload', async () => {
    const service = scriptedService(loadContract())
    vi.stubGlobal('fetch', service.fetch)
    const storage = new MemoryStorage()

    const first = new App(root, new ApiClient(''), storage)
    await first.start('classroom')
    for (const gloss of officialGlosses()) {
      await first.submit(gloss)
    }
    const before = Array.from(root.querySelectorAll('.bubble')).map((b) => b.textContent)

    // Fresh DOM and a fresh App, same sessionStorage: the reload path.
    document.body.innerHTML = '<div id="app"></div>'
    const root2 = document.getElementById('app') as HTMLElement
    const second = new App(root2, new ApiClient(''), storage)
    await second.start()

    const after = Array.from(root2.querySelectorAll('.bubble')).map((b) => b.textContent)
    expect(after).toEqual(before)
    expect(root2.querySelector('.banner.victory')).not.toBeNull()
    expect(service.unmatched).toEqual([])
    vi.unstubAllGlobals()
  })

  it('renders progress and revision from the service view only', () => {
    const view = finalView() as import('../src/api').SessionView
    renderSession(root, view, { onSubmit: () => {}, onHint: () => {} })
    expect(root.dataset.revision).toBe(String(view.revision))
    expect(root.querySelector('.progress')?.textContent).toContain(
      `${view.progress} / ${view.total_steps}`,
    )
    // No business logic on the client: history is rendered verbatim.
    expect(root.querySelectorAll('.bubble.feedback').length).toBe(view.history.length)
  })

  it('shows a retry banner when the service is unreachable', async () => {
    vi.stubGlobal('fetch', (async () => {
      throw new TypeError('network down')
    }) as typeof fetch)
    const app = new App(root, new ApiClient(''), new MemoryStorage())
    await expect(app.start('classroom')).rejects.toThrow()
    vi.unstubAllGlobals()

    // Errors after a session exists surface inline with a retry control.
    const service = scriptedService(loadContract())
    vi.stubGlobal('fetch', service.fetch)
    const storage = new MemoryStorage()
    const app2 = new App(root, new ApiClient(''), storage)
    await app2.start('classroom')
    vi.stubGlobal('fetch', (async () => {
      throw new TypeError('network down')
    }) as typeof fetch)
    await app2.submit('open the door')
    expect(root.querySelector('.banner.error')).not.toBeNull()
    expect(root.querySelector('.banner.error .retry')).not.toBeNull()
    vi.unstubAllGlobals()
  })
})

describe('in-flight request handling', () => {
  it('locks the controls while a request is pending', async () => {
    document.body.innerHTML = '<div id="app"></div>'
    const root = document.getElementById('app') as HTMLElement
    const service = scriptedService(loadContract())
    vi.stubGlobal('fetch', service.fetch)
    const app = new App(root, new ApiClient(''), new MemoryStorage())
    await app.start('classroom')

    const { renderPending } = await import('../src/view.js')
    renderPending(root, 'pick up the hooked pole')
    const input = root.querySelector('.attempt-input') as HTMLInputElement
    const buttons = root.querySelectorAll('.controls button')
    expect(input.disabled).toBe(true)
    buttons.forEach((b) => expect((b as HTMLButtonElement).disabled).toBe(true))
    expect(root.querySelector('.bubble.pending')?.textContent).toBe('pick up the hooked pole')
    vi.unstubAllGlobals()
  })
})
