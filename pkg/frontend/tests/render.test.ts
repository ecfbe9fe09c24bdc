import { describe, expect, it } from 'vitest';

import { GeoFeatureCollection, SignificanceReport } from '../src/api.js';
import { StopView } from '../src/dashboard.js';
import {
    gapColor,
    renderSignificance,
    renderStopMap,
    renderTemporalPanel,
} from '../src/render.js';
import { tape } from './replay.js';

function viewFromStop(stop: {
    stop_id: string;
    name: string;
    lat: number;
    lon: number;
    profile: { total_riders: number; city_routes_ran: number };
    gap_ratio: number | null;
    gap_ratio_infinite: boolean;
    classification: string | null;
}): StopView {
    return {
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
    };
}

describe('gap color gradient', () => {
    it('runs green to red as the ratio climbs', () => {
        expect(gapColor(0, false, 100)).toBe('hsl(120, 75%, 45%)');
        expect(gapColor(100, false, 100)).toBe('hsl(0, 75%, 45%)');
        expect(gapColor(50, false, 100)).toBe('hsl(60, 75%, 45%)');
    });

    it('flags the infinite ratio darkest', () => {
        expect(gapColor(null, true, 100)).toBe('hsl(0, 90%, 25%)');
    });
});

describe('stop map', () => {
    const views = tape<Parameters<typeof viewFromStop>[0][]>('stops').map(viewFromStop);
    const coverage = tape<GeoFeatureCollection>('coverage.geojson');

    it('draws one circle per stop and squares for unserviced blocks', () => {
        const svg = renderStopMap(views, coverage);
        for (const view of views) {
            expect(svg).toContain(`data-stop-id="${view.stop_id}"`);
        }
        const unserviced = coverage.features.filter(
            (f) => f.properties.kind === 'unserviced_block'
        );
        expect(unserviced.length).toBeGreaterThan(0);
        for (const feature of unserviced) {
            expect(svg).toContain(`data-block-id="${feature.properties.block_id}"`);
        }
    });

    it('colors the worst-ratio stop pure red', () => {
        const svg = renderStopMap(views, null);
        const worst = [...views].sort(
            (a, b) => (b.baseline.gap_ratio ?? 0) - (a.baseline.gap_ratio ?? 0)
        )[0];
        const circle = svg
            .split('<circle')
            .find((part) => part.includes(`data-stop-id="${worst.stop_id}"`));
        expect(circle).toContain('hsl(0, 75%, 45%)');
    });
});

describe('significance panel', () => {
    const report = tape<SignificanceReport>('significance_spatial_demand');

    it('renders one sign-colored bar per feature, largest first', () => {
        const svg = renderSignificance(report);
        for (const entry of report.features) {
            expect(svg).toContain(`data-feature="${entry.name}"`);
        }
        const order = [...svg.matchAll(/data-feature="([^"]+)"/g)].map((m) => m[1]);
        const expected = [...report.features]
            .sort((a, b) => b.significance - a.significance)
            .map((e) => e.name);
        expect(order).toEqual(expected);
        for (const entry of report.features) {
            const bar = svg
                .split('<rect')
                .find((part) => part.includes(`data-feature="${entry.name}"`));
            expect(bar).toContain(`data-sign="${entry.sign}"`);
            expect(bar).toContain(entry.sign === 'positive' ? '#c0392b' : '#2e6da4');
        }
    });
});

describe('temporal panel', () => {
    it('plots the traced line and the queried prediction', () => {
        const recorded = tape<Record<string, { response: { predicted_trips: number } }>>(
            'scenario_temporal'
        );
        const at = recorded['revenue_hours=3000_link'].response.predicted_trips;
        const svg = renderTemporalPanel({
            predictor: 'revenue_hours',
            value: 3000,
            predictedTrips: at,
            method: 'linear_link:revenue_hours',
            line: [
                { value: 2400, trips: at - 600 },
                { value: 4200, trips: at + 1200 },
            ],
            error: null,
        });
        expect(svg).toContain('class="link-line"');
        expect(svg).toContain('class="prediction"');
        expect(svg).toContain('data-field="predicted-trips"');
        expect(svg).toContain(
            at.toLocaleString('en-US', { minimumFractionDigits: 1, maximumFractionDigits: 1 })
        );
    });

    it('shows the error state instead of numbers when the call failed', () => {
        const svg = renderTemporalPanel({
            predictor: 'revenue_hours',
            value: 3000,
            predictedTrips: null,
            method: null,
            line: [],
            error: 'ApiError: connection refused',
        });
        expect(svg).toContain('data-field="error"');
        expect(svg).not.toContain('data-field="predicted-trips"');
    });
});
