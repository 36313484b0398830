import { describe, expect, it } from 'vitest'

import { isValidRating } from '../src/api.js'
import {
  afterSubmit,
  canSubmit,
  completed,
  initialState,
  withItem,
  withSelection,
  withSession,
} from '../src/state.js'

const item = {
  image_id: 'img1',
  image_url: '/images/img1',
  previous: null,
}

function ratingState() {
  return withItem(withSession(initialState(), 's1', 3), item)
}

describe('selection rules', () => {
  it('last selection wins', () => {
    let state = ratingState()
    state = withSelection(state, 'valence', 7)
    state = withSelection(state, 'valence', 3)
    expect(state.selectedValence).toBe(3)
  })

  it('axes are independent', () => {
    let state = ratingState()
    state = withSelection(state, 'valence', 2)
    state = withSelection(state, 'arousal', 8)
    expect(state.selectedValence).toBe(2)
    expect(state.selectedArousal).toBe(8)
  })

  it('out-of-range and non-integer selections are ignored', () => {
    let state = ratingState()
    state = withSelection(state, 'valence', 0)
    state = withSelection(state, 'valence', 10)
    state = withSelection(state, 'valence', 4.5)
    expect(state.selectedValence).toBeNull()
  })

  it('moving to the next item clears both selections', () => {
    let state = ratingState()
    state = withSelection(state, 'valence', 5)
    state = withSelection(state, 'arousal', 5)
    state = withItem(state, { ...item, image_id: 'img2' })
    expect(state.selectedValence).toBeNull()
    expect(state.selectedArousal).toBeNull()
  })
})

describe('submit gating', () => {
  it('disabled with no selection', () => {
    expect(canSubmit(ratingState())).toBe(false)
  })

  it('disabled with only one axis selected', () => {
    const state = withSelection(ratingState(), 'valence', 5)
    expect(canSubmit(state)).toBe(false)
  })

  it('enabled once both axes are selected', () => {
    let state = withSelection(ratingState(), 'valence', 5)
    state = withSelection(state, 'arousal', 1)
    expect(canSubmit(state)).toBe(true)
  })

  it('disabled after completion', () => {
    let state = withSelection(ratingState(), 'valence', 5)
    state = withSelection(state, 'arousal', 1)
    state = completed(state)
    expect(canSubmit(state)).toBe(false)
  })
})

describe('progress counter', () => {
  it('increments per submitted rating', () => {
    let state = ratingState()
    expect(state.completed).toBe(0)
    state = afterSubmit(state)
    state = afterSubmit(state)
    expect(state.completed).toBe(2)
  })
})

describe('rating validity', () => {
  it('accepts exactly the nine integer positions', () => {
    for (let value = 1; value <= 9; value += 1) {
      expect(isValidRating(value)).toBe(true)
    }
    expect(isValidRating(0)).toBe(false)
    expect(isValidRating(10)).toBe(false)
    expect(isValidRating(5.5)).toBe(false)
    expect(isValidRating('5')).toBe(false)
    expect(isValidRating(NaN)).toBe(false)
  })
})
