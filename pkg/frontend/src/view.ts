// Pure DOM rendering of a SessionView. The screen is rebuilt from the
// service's view on every revision change, so a page reload always
// reconstructs the same thing.

import type { SessionView } from './api.js'

export interface Handlers {
  onSubmit: (text: string) => void
  onHint: () => void
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

export function renderSession(root: HTMLElement, view: SessionView, handlers: Handlers): void {
  root.textContent = ''
  root.dataset.revision = String(view.revision)

  const pane = el('div', 'image-pane')
  const img = el('img', 'scene-image')
  img.src = view.image_url
  img.onerror = () => {
    // Dry-run bundles ship no rendered image; the layout sketch stands in.
    if (!img.src.endsWith(view.layout_url)) img.src = view.layout_url
  }
  pane.appendChild(img)
  root.appendChild(pane)

  const header = el('div', 'header')
  header.appendChild(el('h2', 'scene-name', view.scene))
  header.appendChild(
    el('span', 'progress', `progress ${view.progress} / ${view.total_steps}`),
  )
  root.appendChild(header)
  root.appendChild(el('p', 'description', view.description))

  if (view.escaped) {
    root.appendChild(el('div', 'banner victory', 'You escaped! \u{1F389}'))
  }

  const log = el('div', 'chat-log')
  for (const entry of view.history) {
    if (entry.attempt !== '(hint)') {
      log.appendChild(el('div', 'bubble attempt', entry.attempt))
    }
    const feedback = entry.feedback
    const kind = entry.attempt === '(hint)' ? 'hint' : feedback.verdict
    log.appendChild(el('div', `bubble feedback ${kind}`, feedback.message))
  }
  root.appendChild(log)

  const controls = el('div', 'controls')
  const input = el('input', 'attempt-input') as HTMLInputElement
  input.type = 'text'
  input.placeholder = 'What do you do?'
  input.disabled = view.escaped
  const send = el('button', 'send', 'Try it')
  send.disabled = view.escaped
  send.onclick = () => {
    const text = input.value.trim()
    if (text) handlers.onSubmit(text)
  }
  input.onkeydown = (event) => {
    if (event.key === 'Enter') send.click()
  }
  const hint = el('button', 'hint', 'Hint')
  hint.disabled = view.escaped
  hint.onclick = () => handlers.onHint()
  controls.append(input, send, hint)
  root.appendChild(controls)
}

export function renderPending(root: HTMLElement, text: string): void {
  const log = root.querySelector('.chat-log')
  if (log) {
    log.appendChild(el('div', 'bubble attempt pending', text))
  }
  // One request at a time: lock the controls until the next render.
  root
    .querySelectorAll<HTMLInputElement | HTMLButtonElement>('.controls input, .controls button')
    .forEach((node) => {
      node.disabled = true
    })
}

export function renderError(root: HTMLElement, message: string, onRetry?: () => void): void {
  const existing = root.querySelector('.banner.error')
  if (existing) existing.remove()
  const banner = el('div', 'banner error', message)
  if (onRetry) {
    const retry = el('button', 'retry', 'Retry')
    retry.onclick = onRetry
    banner.appendChild(retry)
  }
  root.prepend(banner)
}
