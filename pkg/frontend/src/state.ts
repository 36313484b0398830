// Pure UI state and its transitions. The flow controller applies these;
// rendering reads them. No selection survives moving to the next item.

import { type RatingItem, isValidRating } from './api.js'

export type Axis = 'valence' | 'arousal'

export type Phase = 'idle' | 'rating' | 'complete' | 'fatal'

export interface UiState {
  sessionId: string | null
  item: RatingItem | null
  selectedValence: number | null
  selectedArousal: number | null
  completed: number
  quota: number
  phase: Phase
  notice: string | null
}

export function initialState(): UiState {
  return {
    sessionId: null,
    item: null,
    selectedValence: null,
    selectedArousal: null,
    completed: 0,
    quota: 0,
    phase: 'idle',
    notice: null,
  }
}

export function withSession(state: UiState, sessionId: string, quota: number): UiState {
  return { ...state, sessionId, quota, completed: 0, phase: 'rating', notice: null }
}

export function withItem(state: UiState, item: RatingItem): UiState {
  return {
    ...state,
    item,
    selectedValence: null,
    selectedArousal: null,
    phase: 'rating',
  }
}

export function withSelection(state: UiState, axis: Axis, value: number): UiState {
  if (!isValidRating(value)) return state // ignore out-of-range input
  return axis === 'valence'
    ? { ...state, selectedValence: value }
    : { ...state, selectedArousal: value }
}

export function withNotice(state: UiState, notice: string | null): UiState {
  return { ...state, notice }
}

export function afterSubmit(state: UiState): UiState {
  return { ...state, completed: state.completed + 1, notice: null }
}

export function completed(state: UiState): UiState {
  return { ...state, item: null, phase: 'complete', notice: null }
}

export function fatal(state: UiState, notice: string): UiState {
  return { ...state, phase: 'fatal', notice }
}

export function canSubmit(state: UiState): boolean {
  return (
    state.phase === 'rating' &&
    state.item !== null &&
    state.selectedValence !== null &&
    state.selectedArousal !== null
  )
}
