// Typed client for the annotation service endpoints. The server stays
// authoritative; this layer only validates what must never leave the
// client malformed (integer ratings in 1..9).

export type PreviousPane = {
  image_id: string
  image_url: string
  valence: number
  arousal: number
}

export type RatingItem = {
  image_id: string
  image_url: string
  previous: PreviousPane | null
}

export type SessionInfo = {
  session_id: string
  remaining_quota: number
}

export type NextResult =
  | { kind: 'item'; item: RatingItem }
  | { kind: 'complete' }

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message)
    this.name = 'ApiError'
  }
}

export function isValidRating(value: unknown): value is number {
  return typeof value === 'number' && Number.isInteger(value) && value >= 1 && value <= 9
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json()
    if (body && typeof body.error === 'string') return body.error
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`
}

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchFn(`${this.baseUrl}${path}`, init)
  }

  async openSession(workerId: string): Promise<SessionInfo> {
    const response = await this.request('/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ worker_id: workerId }),
    })
    if (response.status !== 201) {
      throw new ApiError(response.status, await errorMessage(response))
    }
    return (await response.json()) as SessionInfo
  }

  async nextItem(sessionId: string): Promise<NextResult> {
    const response = await this.request(`/sessions/${sessionId}/next`)
    if (response.status === 204) return { kind: 'complete' }
    if (response.status !== 200) {
      throw new ApiError(response.status, await errorMessage(response))
    }
    return { kind: 'item', item: (await response.json()) as RatingItem }
  }

  async submitRating(
    sessionId: string,
    imageId: string,
    valence: number,
    arousal: number,
  ): Promise<void> {
    if (!isValidRating(valence) || !isValidRating(arousal)) {
      throw new ApiError(0, `ratings must be integers in 1..9, got ${valence}/${arousal}`)
    }
    const response = await this.request(`/sessions/${sessionId}/ratings`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ image_id: imageId, valence, arousal }),
    })
    if (response.status !== 201) {
      throw new ApiError(response.status, await errorMessage(response))
    }
  }
}
