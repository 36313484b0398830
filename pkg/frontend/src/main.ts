// Bootstrap: ask for a worker id, then hand the page to the flow.

import { AnnotationApi } from './api.js'
import { AnnotationFlow } from './flow.js'

function start(): void {
  const root = document.getElementById('app')
  if (root === null) throw new Error('missing #app container')

  const form = document.getElementById('worker-form') as HTMLFormElement | null
  const input = document.getElementById('worker-id') as HTMLInputElement | null
  if (form === null || input === null) throw new Error('missing worker form')

  form.addEventListener('submit', (event) => {
    event.preventDefault()
    const workerId = input.value.trim()
    if (workerId === '') return
    form.hidden = true

    const flow = new AnnotationFlow(new AnnotationApi(''), document, root)
    document.addEventListener('keydown', (event) => {
      if (event.target instanceof HTMLInputElement) return
      flow.handleKey(event.key, event.shiftKey)
    })
    void flow.start(workerId)
  })
}

document.addEventListener('DOMContentLoaded', start)
