/**
 * Dashboard state: per-stop baselines, slider overrides, and scenario
 * results. Scenario calls are debounced while a slider drags, at most one
 * request is in flight per stop, and stale responses are discarded by
 * sequence number so a slow earlier response can never overwrite a newer
 * one.
 */

import { ApiClient, ScenarioResult, Stop } from './api.js';

export interface StopView {
    stop_id: string;
    name: string;
    lat: number;
    lon: number;
    baseline: {
        riders: number;
        routes: number;
        gap_ratio: number | null;
        gap_ratio_infinite: boolean;
        classification: string | null;
    };
    override_routes: number;
    scenario: ScenarioResult | null;
    pending: boolean;
    error: string | null;
}

export const SCENARIO_DEBOUNCE_MS = 250;

type Scheduler = (callback: () => void, ms: number) => unknown;
type CancelTimer = (handle: unknown) => void;

export class Dashboard {
    private views = new Map<string, StopView>();
    private sequence = new Map<string, number>();
    private timers = new Map<string, unknown>();
    private listeners: Array<() => void> = [];
    public loadError: string | null = null;

    constructor(
        private readonly api: ApiClient,
        private readonly schedule: Scheduler = (cb, ms) => setTimeout(cb, ms),
        private readonly cancel: CancelTimer = (h) => clearTimeout(h as number)
    ) {}

    onChange(listener: () => void): void {
        this.listeners.push(listener);
    }

    private notify(): void {
        for (const listener of this.listeners) {
            listener();
        }
    }

    stops(): StopView[] {
        return [...this.views.values()];
    }

    view(stopId: string): StopView {
        const view = this.views.get(stopId);
        if (!view) {
            throw new Error(`unknown stop ${stopId}`);
        }
        return view;
    }

    async load(): Promise<void> {
        this.loadError = null;
        let stops: Stop[];
        try {
            stops = await this.api.stops();
        } catch (error) {
            this.loadError = String(error);
            this.views.clear();
            this.notify();
            return;
        }
        this.views.clear();
        for (const stop of stops) {
            this.views.set(stop.stop_id, {
                stop_id: stop.stop_id,
                name: stop.name,
                lat: stop.lat,
                lon: stop.lon,
                baseline: {
                    riders: stop.profile.total_riders,
                    routes: stop.profile.city_routes_ran,
                    gap_ratio: stop.gap_ratio,
                    gap_ratio_infinite: stop.gap_ratio_infinite,
                    classification: stop.classification,
                },
                override_routes: stop.profile.city_routes_ran,
                scenario: null,
                pending: false,
                error: null,
            });
        }
        this.notify();
    }

    /**
     * Move a stop's routes-ran slider. The scenario request fires after the
     * debounce window; the returned promise resolves once the view holds the
     * outcome (result or error).
     */
    setOverride(stopId: string, routes: number): Promise<void> {
        const view = this.view(stopId);
        if (routes < 0) {
            view.error = 'override must be >= 0';
            this.notify();
            return Promise.resolve();
        }
        view.override_routes = routes;
        view.pending = true;
        view.error = null;
        this.notify();

        const existing = this.timers.get(stopId);
        if (existing !== undefined) {
            this.cancel(existing);
        }
        return new Promise((resolve) => {
            const handle = this.schedule(() => {
                this.timers.delete(stopId);
                void this.issueScenario(stopId, routes).then(resolve);
            }, SCENARIO_DEBOUNCE_MS);
            this.timers.set(stopId, handle);
        });
    }

    private async issueScenario(stopId: string, routes: number): Promise<void> {
        const ticket = (this.sequence.get(stopId) ?? 0) + 1;
        this.sequence.set(stopId, ticket);
        const view = this.view(stopId);
        try {
            const body = await this.api.scenarioSpatial(stopId, routes);
            if (this.sequence.get(stopId) !== ticket) {
                return; // a newer request superseded this one
            }
            view.scenario = body.results[0];
            view.pending = false;
            view.error = null;
        } catch (error) {
            if (this.sequence.get(stopId) !== ticket) {
                return;
            }
            view.scenario = null; // never show numbers from a failed call
            view.pending = false;
            view.error = String(error);
        }
        this.notify();
    }
}
