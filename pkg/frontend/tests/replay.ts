/**
 * Offline replay of recorded service responses. The tapes were captured
 * from a real pipeline run (see scripts/record_ui_fixtures.py in the
 * repository root); the fake fetch serves them and logs every request so
 * tests can assert the exact bodies the dashboard sends.
 */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

export function tape<T>(name: string): T {
    return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), 'utf-8')) as T;
}

export interface RecordedRequest {
    method: string;
    path: string;
    body: unknown;
}

export interface ReplayServer {
    fetch: typeof fetch;
    requests: RecordedRequest[];
}

function jsonResponse(payload: unknown, status = 200): Response {
    return new Response(JSON.stringify(payload), {
        status,
        headers: { 'Content-Type': 'application/json' },
    });
}

const notFound = (message: string): Response =>
    jsonResponse({ code: 'unknown_stop', message }, 404);

/** Serve the recorded tapes; unknown routes get the service's error shape. */
export function replayServer(): ReplayServer {
    const stops = tape<Array<{ stop_id: string; profile: { city_routes_ran: number } }>>('stops');
    const scenarios = tape<Record<string, { request: unknown; response: unknown }>>(
        'scenario_spatial'
    );
    const predictions = tape<Record<string, unknown>>('predict_spatial');
    const temporal = tape<Record<string, { request: unknown; response: unknown }>>(
        'scenario_temporal'
    );
    const requests: RecordedRequest[] = [];

    const byOverride = new Map<string, unknown>();
    for (const entry of Object.values(scenarios)) {
        const request = entry.request as {
            overrides: Array<{ stop_id: string; city_routes_ran: number }>;
        };
        const key = `${request.overrides[0].stop_id}@${request.overrides[0].city_routes_ran}`;
        byOverride.set(key, entry.response);
    }
    const temporalByBody = new Map<string, unknown>();
    for (const entry of Object.values(temporal)) {
        temporalByBody.set(JSON.stringify(entry.request), entry.response);
    }

    const handler = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
        const url = String(input);
        const path = url.replace(/^https?:\/\/[^/]+/, '');
        const body = init?.body ? JSON.parse(String(init.body)) : null;
        requests.push({ method: init?.method ?? 'GET', path, body });

        if (path === '/health') {
            return jsonResponse({ status: 'ok' });
        }
        if (path === '/stops') {
            return jsonResponse(stops);
        }
        if (path.startsWith('/significance')) {
            const model = new URL(url, 'http://replay').searchParams.get('model');
            if (model === 'spatial_demand' || model === 'temporal_demand') {
                return jsonResponse(tape(`significance_${model}`));
            }
            return jsonResponse({ code: 'unknown_model', message: `no report for ${model}` }, 404);
        }
        if (path === '/geo/coverage') {
            return jsonResponse(tape('coverage.geojson'));
        }
        if (path === '/predict/spatial') {
            const prediction = predictions[(body as { stop_id: string }).stop_id];
            return prediction
                ? jsonResponse(prediction)
                : notFound(`no stop ${(body as { stop_id: string }).stop_id}`);
        }
        if (path === '/scenario/spatial') {
            const override = (body as {
                overrides: Array<{ stop_id: string; city_routes_ran: number }>;
            }).overrides[0];
            if (override.city_routes_ran < 0) {
                return jsonResponse(
                    { code: 'negative_override', message: 'routes override must be >= 0' },
                    422
                );
            }
            const recorded = byOverride.get(`${override.stop_id}@${override.city_routes_ran}`);
            if (!recorded) {
                return notFound(`no tape for ${override.stop_id}@${override.city_routes_ran}`);
            }
            return jsonResponse(recorded);
        }
        if (path === '/scenario/temporal') {
            const recorded = temporalByBody.get(JSON.stringify(body));
            return recorded
                ? jsonResponse(recorded)
                : jsonResponse({ code: 'malformed_body', message: 'no tape for body' }, 400);
        }
        return jsonResponse({ code: 'unknown', message: `no route ${path}` }, 404);
    };

    return { fetch: handler as typeof fetch, requests };
}

/** A fetch that always fails, for service-down tests. */
export function downServer(): typeof fetch {
    return (async () => {
        throw new TypeError('fetch failed: connection refused');
    }) as unknown as typeof fetch;
}
