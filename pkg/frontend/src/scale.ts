// Nine-point pictorial rating scale: a radio row of manikin figures.
// Exactly one position is selectable at a time; clicking another moves the
// selection (last wins).

import type { Axis } from './state.js'

export const SCALE_POSITIONS = [1, 2, 3, 4, 5, 6, 7, 8, 9] as const

export interface ScaleHandle {
  root: HTMLElement
  setSelected(value: number | null): void
}

const AXIS_CAPTIONS: Record<Axis, [string, string]> = {
  valence: ['negative', 'positive'],
  arousal: ['calm', 'excited'],
}

export function renderScale(
  doc: Document,
  axis: Axis,
  onSelect: (axis: Axis, value: number) => void,
): ScaleHandle {
  const root = doc.createElement('fieldset')
  root.className = `scale scale-${axis}`
  root.dataset.axis = axis

  const legend = doc.createElement('legend')
  legend.textContent = axis
  root.appendChild(legend)

  const row = doc.createElement('div')
  row.className = 'scale-row'
  root.appendChild(row)

  const buttons = new Map<number, HTMLButtonElement>()
  for (const value of SCALE_POSITIONS) {
    const cell = doc.createElement('button')
    cell.type = 'button'
    cell.className = 'scale-cell'
    cell.dataset.value = String(value)
    cell.setAttribute('role', 'radio')
    cell.setAttribute('aria-checked', 'false')

    const figure = doc.createElement('img')
    figure.src = `manikin/${axis}-${value}.svg`
    figure.alt = `${axis} ${value}`
    cell.appendChild(figure)

    const label = doc.createElement('span')
    label.textContent = String(value)
    cell.appendChild(label)

    cell.addEventListener('click', () => onSelect(axis, value))
    buttons.set(value, cell)
    row.appendChild(cell)
  }

  const captions = doc.createElement('div')
  captions.className = 'scale-captions'
  const [low, high] = AXIS_CAPTIONS[axis]
  captions.innerHTML = `<span>1 = ${low}</span><span>9 = ${high}</span>`
  root.appendChild(captions)

  return {
    root,
    setSelected(value: number | null) {
      for (const [position, button] of buttons) {
        const active = position === value
        button.classList.toggle('selected', active)
        button.setAttribute('aria-checked', active ? 'true' : 'false')
      }
    },
  }
}
