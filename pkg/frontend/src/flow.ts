// Flow controller: open session -> loop (next item -> render pair ->
// submit) -> completion screen, with quota and conflict errors surfaced
// without losing state. The server's sequence is never reordered: the only
// image ever submitted is the one the server most recently handed out.

import { AnnotationApi, ApiError } from './api.js'
import {
  type Axis,
  type UiState,
  afterSubmit,
  canSubmit,
  completed,
  fatal,
  initialState,
  withItem,
  withNotice,
  withSelection,
  withSession,
} from './state.js'
import { AnnotationView } from './view.js'

export class AnnotationFlow {
  state: UiState = initialState()
  private view: AnnotationView

  constructor(
    private readonly api: AnnotationApi,
    doc: Document,
    root: HTMLElement,
  ) {
    this.view = new AnnotationView(doc, root, {
      onSelect: (axis, value) => this.select(axis, value),
      onSubmit: () => {
        void this.submit()
      },
    })
  }

  async start(workerId: string): Promise<void> {
    try {
      const session = await this.api.openSession(workerId)
      this.state = withSession(this.state, session.session_id, session.remaining_quota)
    } catch (error) {
      this.state = fatal(this.state, describe(error))
      this.view.render(this.state)
      return
    }
    await this.advance()
  }

  /** Fetch the next item (or the completion signal) and render it. */
  async advance(): Promise<void> {
    if (this.state.sessionId === null) return
    try {
      const result = await this.api.nextItem(this.state.sessionId)
      this.state =
        result.kind === 'complete'
          ? completed(this.state)
          : withItem(this.state, result.item)
    } catch (error) {
      this.state = fatal(this.state, describe(error))
    }
    this.view.render(this.state)
  }

  select(axis: Axis, value: number): void {
    this.state = withSelection(this.state, axis, value)
    this.view.refresh(this.state)
  }

  async submit(): Promise<void> {
    if (!canSubmit(this.state)) return
    const { sessionId, item, selectedValence, selectedArousal } = this.state
    if (sessionId === null || item === null) return
    try {
      await this.api.submitRating(
        sessionId,
        item.image_id,
        selectedValence as number,
        selectedArousal as number,
      )
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Conflict or ordering mismatch: show it, then resync with the
        // server's idea of the current item.
        this.state = withNotice(this.state, error.message)
        this.view.refresh(this.state)
        await this.advance()
        return
      }
      if (error instanceof ApiError && error.status === 400) {
        this.state = withNotice(this.state, error.message)
        this.view.refresh(this.state)
        return
      }
      this.state = fatal(this.state, describe(error))
      this.view.render(this.state)
      return
    }
    this.state = afterSubmit(this.state)
    await this.advance()
  }

  /** Keyboard shortcuts: 1-9 selects valence, Shift+1-9 selects arousal. */
  handleKey(key: string, shift: boolean): void {
    const digit = Number.parseInt(key, 10)
    if (!Number.isInteger(digit) || digit < 1 || digit > 9) return
    this.select(shift ? 'arousal' : 'valence', digit)
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError && error.status === 403) {
    return `Question quota reached: ${error.message}`
  }
  if (error instanceof Error) return error.message
  return String(error)
}
