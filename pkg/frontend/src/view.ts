// DOM rendering of the three screens: rating (current image, previous pane
// with its recorded rating, two scales, submit), completion, and fatal
// errors. The view is dumb; the flow controller owns all transitions.

import type { Axis, UiState } from './state.js'
import { canSubmit } from './state.js'
import { renderScale, type ScaleHandle } from './scale.js'

export interface ViewCallbacks {
  onSelect(axis: Axis, value: number): void
  onSubmit(): void
}

export class AnnotationView {
  private scales: Partial<Record<Axis, ScaleHandle>> = {}
  private submitButton: HTMLButtonElement | null = null

  constructor(
    private readonly doc: Document,
    private readonly root: HTMLElement,
    private readonly callbacks: ViewCallbacks,
  ) {}

  render(state: UiState): void {
    if (state.phase === 'complete') {
      this.renderCompletion(state)
    } else if (state.phase === 'fatal') {
      this.renderFatal(state)
    } else if (state.item !== null) {
      this.renderRating(state)
    }
  }

  /** Update selection highlights and the submit gate without a rebuild. */
  refresh(state: UiState): void {
    this.scales.valence?.setSelected(state.selectedValence)
    this.scales.arousal?.setSelected(state.selectedArousal)
    if (this.submitButton) this.submitButton.disabled = !canSubmit(state)
    const noticeBox = this.root.querySelector<HTMLElement>('.notice')
    if (noticeBox) {
      noticeBox.textContent = state.notice ?? ''
      noticeBox.hidden = state.notice === null
    }
  }

  private clear(): void {
    this.root.textContent = ''
    this.scales = {}
    this.submitButton = null
  }

  private renderRating(state: UiState): void {
    const item = state.item
    if (item === null) return
    this.clear()
    const doc = this.doc

    const progress = doc.createElement('p')
    progress.className = 'progress'
    progress.textContent = `Question ${state.completed + 1} of ${state.quota}`
    this.root.appendChild(progress)

    const pair = doc.createElement('div')
    pair.className = 'image-pair'
    this.root.appendChild(pair)

    if (item.previous !== null) {
      const previousPane = doc.createElement('figure')
      previousPane.className = 'pane previous-pane'
      const img = doc.createElement('img')
      img.src = item.previous.image_url
      img.alt = `previously rated image ${item.previous.image_id}`
      previousPane.appendChild(img)
      const caption = doc.createElement('figcaption')
      caption.textContent =
        `Your previous answer: valence ${item.previous.valence}, ` +
        `arousal ${item.previous.arousal}`
      previousPane.appendChild(caption)
      pair.appendChild(previousPane)
    }

    const currentPane = doc.createElement('figure')
    currentPane.className = 'pane current-pane'
    const img = doc.createElement('img')
    img.src = item.image_url
    img.alt = `image ${item.image_id} to rate`
    currentPane.appendChild(img)
    const caption = doc.createElement('figcaption')
    caption.textContent = 'Rate this image'
    currentPane.appendChild(caption)
    pair.appendChild(currentPane)

    for (const axis of ['valence', 'arousal'] as const) {
      const handle = renderScale(doc, axis, this.callbacks.onSelect)
      this.scales[axis] = handle
      this.root.appendChild(handle.root)
    }

    const notice = doc.createElement('p')
    notice.className = 'notice'
    notice.hidden = true
    this.root.appendChild(notice)

    const submit = doc.createElement('button')
    submit.type = 'button'
    submit.className = 'submit'
    submit.textContent = 'Submit rating'
    submit.addEventListener('click', () => this.callbacks.onSubmit())
    this.submitButton = submit
    this.root.appendChild(submit)

    this.refresh(state)
  }

  private renderCompletion(state: UiState): void {
    this.clear()
    const heading = this.doc.createElement('h2')
    heading.className = 'completion'
    heading.textContent = 'All done - thank you!'
    this.root.appendChild(heading)
    const detail = this.doc.createElement('p')
    detail.textContent = `You rated ${state.completed} images.`
    this.root.appendChild(detail)
  }

  private renderFatal(state: UiState): void {
    this.clear()
    const box = this.doc.createElement('p')
    box.className = 'fatal'
    box.textContent = state.notice ?? 'Something went wrong.'
    this.root.appendChild(box)
  }
}
