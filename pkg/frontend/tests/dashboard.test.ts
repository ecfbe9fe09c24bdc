/**
 * Dashboard state against the recorded three-stop town: slider overrides
 * issue the documented POST body and render exactly the taped values.
 */

import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { Dashboard } from '../src/dashboard.js';
import { renderScenarioPanel } from '../src/render.js';
import { downServer, replayServer, tape } from './replay.js';

type StopsTape = Array<{
    stop_id: string;
    profile: { city_routes_ran: number; total_riders: number };
    gap_ratio: number | null;
    classification: string | null;
}>;

type ScenarioTape = Record<string, {
    request: { overrides: Array<{ stop_id: string; city_routes_ran: number }> };
    response: { results: Array<{ predicted_demand: number; demand_gap: number; classification: string }> };
}>;

const immediate = (cb: () => void): number => {
    cb();
    return 0;
};

afterEach(() => {
    vi.unstubAllGlobals();
});

async function loadedDashboard() {
    const server = replayServer();
    vi.stubGlobal('fetch', server.fetch);
    const dashboard = new Dashboard(new ApiClient(), immediate, () => {});
    await dashboard.load();
    return { dashboard, server };
}

describe('baseline load', () => {
    it('builds one view per taped stop with baseline values', async () => {
        const { dashboard } = await loadedDashboard();
        const stops = tape<StopsTape>('stops');
        expect(dashboard.stops().map((v) => v.stop_id).sort()).toEqual(
            stops.map((s) => s.stop_id).sort()
        );
        for (const stop of stops) {
            const view = dashboard.view(stop.stop_id);
            expect(view.baseline.riders).toBe(stop.profile.total_riders);
            expect(view.baseline.routes).toBe(stop.profile.city_routes_ran);
            expect(view.baseline.gap_ratio).toBe(stop.gap_ratio);
            expect(view.baseline.classification).toBe(stop.classification);
            expect(view.override_routes).toBe(stop.profile.city_routes_ran);
        }
    });
});

describe('slider overrides (acceptance: recorded three-stop fixture)', () => {
    it('issues the documented POST body and renders the taped demand_gap', async () => {
        const { dashboard, server } = await loadedDashboard();
        const scenarios = tape<ScenarioTape>('scenario_spatial');
        for (const stop of tape<StopsTape>('stops')) {
            const recorded = scenarios[`${stop.stop_id}:plus5`];
            const routes = recorded.request.overrides[0].city_routes_ran;
            server.requests.length = 0;
            await dashboard.setOverride(stop.stop_id, routes);

            expect(server.requests).toEqual([
                {
                    method: 'POST',
                    path: '/scenario/spatial',
                    body: { overrides: [{ stop_id: stop.stop_id, city_routes_ran: routes }] },
                },
            ]);
            const view = dashboard.view(stop.stop_id);
            expect(view.scenario).toEqual(recorded.response.results[0]);

            const html = renderScenarioPanel(view);
            const expectedGap = recorded.response.results[0].demand_gap.toLocaleString('en-US', {
                minimumFractionDigits: 1,
                maximumFractionDigits: 1,
            });
            expect(html).toContain(`data-field="demand-gap">${expectedGap}<`);
            expect(html).toContain(recorded.response.results[0].classification);
        }
    });

    it('identity override renders the baseline demand values', async () => {
        const { dashboard } = await loadedDashboard();
        const scenarios = tape<ScenarioTape>('scenario_spatial');
        for (const stop of tape<StopsTape>('stops')) {
            const recorded = scenarios[`${stop.stop_id}:identity`];
            await dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran);
            const view = dashboard.view(stop.stop_id);
            // the identity scenario is the baseline prediction for the stop
            expect(view.scenario?.predicted_demand).toBe(
                recorded.response.results[0].predicted_demand
            );
            expect(view.scenario?.demand_gap).toBe(recorded.response.results[0].demand_gap);
            expect(view.override_routes).toBe(stop.profile.city_routes_ran);
        }
    });

    it('re-requesting the same scenario renders identical values', async () => {
        const { dashboard } = await loadedDashboard();
        const stop = tape<StopsTape>('stops')[0];
        const routes = stop.profile.city_routes_ran + 5;
        await dashboard.setOverride(stop.stop_id, routes);
        const first = { ...dashboard.view(stop.stop_id).scenario! };
        await dashboard.setOverride(stop.stop_id, routes);
        expect(dashboard.view(stop.stop_id).scenario).toEqual(first);
    });

    it('rejects negative overrides locally without a request', async () => {
        const { dashboard, server } = await loadedDashboard();
        const stop = tape<StopsTape>('stops')[0];
        server.requests.length = 0;
        await dashboard.setOverride(stop.stop_id, -1);
        expect(server.requests).toEqual([]);
        expect(dashboard.view(stop.stop_id).error).toContain('>= 0');
    });
});

describe('debounce and stale responses', () => {
    it('a dragged slider cancels the earlier debounce timer', async () => {
        const server = replayServer();
        vi.stubGlobal('fetch', server.fetch);
        const pending = new Map<number, () => void>();
        let nextHandle = 0;
        const schedule = (cb: () => void): number => {
            pending.set(++nextHandle, cb);
            return nextHandle;
        };
        const cancel = (handle: unknown): void => {
            pending.delete(handle as number);
        };
        const dashboard = new Dashboard(new ApiClient(), schedule, cancel);
        await dashboard.load();
        const stop = tape<StopsTape>('stops')[0];
        const drag1 = dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran + 5);
        const drag2 = dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran);
        expect(pending.size).toBe(1); // first timer cancelled by the second drag
        server.requests.length = 0;
        for (const cb of [...pending.values()]) {
            cb();
        }
        await drag2;
        expect(server.requests.length).toBe(1);
        expect(server.requests[0].body).toEqual({
            overrides: [{ stop_id: stop.stop_id, city_routes_ran: stop.profile.city_routes_ran }],
        });
        void drag1;
    });

    it('discards a slow stale response by sequence number', async () => {
        const stops = tape<StopsTape>('stops');
        const scenarios = tape<ScenarioTape>('scenario_spatial');
        const stop = stops[0];
        const identity = scenarios[`${stop.stop_id}:identity`].response;
        const plus5 = scenarios[`${stop.stop_id}:plus5`].response;

        let release: (() => void) | null = null;
        const slowThenFast = (async (input: RequestInfo | URL, init?: RequestInit) => {
            const body = init?.body ? JSON.parse(String(init.body)) : null;
            if (String(input).endsWith('/stops')) {
                return new Response(JSON.stringify(stops), { status: 200 });
            }
            const routes = body.overrides[0].city_routes_ran;
            if (routes === stop.profile.city_routes_ran) {
                // first request: stall until released
                await new Promise<void>((resolve) => {
                    release = resolve;
                });
                return new Response(JSON.stringify(identity), { status: 200 });
            }
            return new Response(JSON.stringify(plus5), { status: 200 });
        }) as typeof fetch;
        vi.stubGlobal('fetch', slowThenFast);

        const dashboard = new Dashboard(new ApiClient(), immediate, () => {});
        await dashboard.load();
        const slow = dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran);
        await Promise.resolve();
        const fast = dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran + 5);
        await fast;
        release!();
        await slow;
        // the newer (+5) result must win even though the older response landed last
        expect(dashboard.view(stop.stop_id).scenario).toEqual(plus5.results[0]);
    });
});

describe('service down', () => {
    it('shows an error state and no stale numbers', async () => {
        vi.stubGlobal('fetch', downServer());
        const dashboard = new Dashboard(new ApiClient(), immediate, () => {});
        await dashboard.load();
        expect(dashboard.loadError).toContain('connection refused');
        expect(dashboard.stops()).toEqual([]);
    });

    it('a scenario failure clears the displayed scenario', async () => {
        const { dashboard } = await loadedDashboard();
        const stop = tape<StopsTape>('stops')[0];
        await dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran + 5);
        expect(dashboard.view(stop.stop_id).scenario).not.toBeNull();
        vi.stubGlobal('fetch', downServer());
        await dashboard.setOverride(stop.stop_id, stop.profile.city_routes_ran + 6);
        const view = dashboard.view(stop.stop_id);
        expect(view.scenario).toBeNull();
        expect(view.error).toContain('connection refused');
        const html = renderScenarioPanel(view);
        expect(html).toContain('data-field="error"');
        expect(html).not.toContain('data-field="demand-gap"');
    });
});
