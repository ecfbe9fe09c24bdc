/**
 * Pure rendering: every function maps response-derived state to an HTML or
 * SVG string. No DOM access and no arithmetic beyond layout, so the full
 * render path is testable offline against recorded tapes.
 */

import { GeoFeatureCollection, SignificanceReport } from './api.js';
import { StopView } from './dashboard.js';

const escape = (text: string): string =>
    text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');

export function formatNumber(value: number, digits = 1): string {
    return value.toLocaleString('en-US', {
        minimumFractionDigits: digits,
        maximumFractionDigits: digits,
    });
}

/** Riders-per-route mapped onto a green-to-red gradient; worst ratio is darkest red. */
export function gapColor(ratio: number | null, infinite: boolean, maxRatio: number): string {
    if (infinite) {
        return 'hsl(0, 90%, 25%)';
    }
    if (ratio === null || maxRatio <= 0) {
        return 'hsl(120, 60%, 45%)';
    }
    const fraction = Math.max(0, Math.min(1, ratio / maxRatio));
    const hue = 120 * (1 - fraction);
    return `hsl(${Math.round(hue)}, 75%, 45%)`;
}

interface MapBounds {
    minLat: number;
    maxLat: number;
    minLon: number;
    maxLon: number;
}

function boundsOf(points: Array<{ lat: number; lon: number }>): MapBounds {
    const lats = points.map((p) => p.lat);
    const lons = points.map((p) => p.lon);
    const pad = 0.002;
    return {
        minLat: Math.min(...lats) - pad,
        maxLat: Math.max(...lats) + pad,
        minLon: Math.min(...lons) - pad,
        maxLon: Math.max(...lons) + pad,
    };
}

function project(lat: number, lon: number, bounds: MapBounds, width: number, height: number) {
    const x = ((lon - bounds.minLon) / (bounds.maxLon - bounds.minLon)) * width;
    const y = height - ((lat - bounds.minLat) / (bounds.maxLat - bounds.minLat)) * height;
    return { x, y };
}

/**
 * Stops plotted by coordinates and colored by gap ratio, with unserviced
 * blocks overlaid as red squares.
 */
export function renderStopMap(
    views: StopView[],
    coverage: GeoFeatureCollection | null,
    width = 640,
    height = 480
): string {
    if (views.length === 0) {
        return `<svg class="stop-map" width="${width}" height="${height}"></svg>`;
    }
    const unserviced = (coverage?.features ?? []).filter(
        (f) => f.properties.kind === 'unserviced_block'
    );
    const everything = [
        ...views,
        ...unserviced.map((f) => ({ lat: f.geometry.coordinates[1], lon: f.geometry.coordinates[0] })),
    ];
    const bounds = boundsOf(everything);
    const maxRatio = Math.max(
        0,
        ...views.filter((v) => !v.baseline.gap_ratio_infinite).map((v) => v.baseline.gap_ratio ?? 0)
    );
    const parts: string[] = [];
    for (const feature of unserviced) {
        const { x, y } = project(
            feature.geometry.coordinates[1], feature.geometry.coordinates[0], bounds, width, height
        );
        parts.push(
            `<rect class="unserviced" data-block-id="${escape(String(feature.properties.block_id))}" ` +
            `x="${(x - 6).toFixed(1)}" y="${(y - 6).toFixed(1)}" width="12" height="12" ` +
            `fill="crimson" opacity="0.8"><title>unserviced block ` +
            `${escape(String(feature.properties.block_id))}</title></rect>`
        );
    }
    for (const view of views) {
        const { x, y } = project(view.lat, view.lon, bounds, width, height);
        const color = gapColor(view.baseline.gap_ratio, view.baseline.gap_ratio_infinite, maxRatio);
        const ratioText = view.baseline.gap_ratio_infinite
            ? 'inf'
            : formatNumber(view.baseline.gap_ratio ?? 0);
        parts.push(
            `<circle class="stop" data-stop-id="${escape(view.stop_id)}" ` +
            `cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="8" fill="${color}">` +
            `<title>${escape(view.name)}: ${ratioText} riders/route ` +
            `(${escape(view.baseline.classification ?? 'n/a')})</title></circle>`
        );
    }
    return `<svg class="stop-map" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}">${parts.join('')}</svg>`;
}

/** Horizontal bars; red marks a positive average effect, blue a negative one. */
export function renderSignificance(report: SignificanceReport, width = 520): string {
    const entries = [...report.features].sort((a, b) => b.significance - a.significance);
    const maxValue = Math.max(...entries.map((e) => e.significance), 1e-12);
    const rowHeight = 26;
    const labelWidth = 180;
    const parts: string[] = [];
    entries.forEach((entry, i) => {
        const barWidth = ((width - labelWidth - 10) * entry.significance) / maxValue;
        const color = entry.sign === 'positive' ? '#c0392b' : '#2e6da4';
        const y = i * rowHeight;
        parts.push(
            `<text x="${labelWidth - 6}" y="${y + 17}" text-anchor="end" ` +
            `font-size="12">${escape(entry.name)}</text>`,
            `<rect class="significance-bar" data-feature="${escape(entry.name)}" ` +
            `data-sign="${entry.sign}" x="${labelWidth}" y="${y + 4}" ` +
            `width="${barWidth.toFixed(1)}" height="${rowHeight - 8}" fill="${color}">` +
            `<title>${escape(entry.name)}: ${entry.significance.toFixed(3)}</title></rect>`
        );
    });
    return `<svg class="significance" width="${width}" ` +
        `height="${entries.length * rowHeight}">${parts.join('')}</svg>`;
}

/** One stop's slider panel: baseline numbers, override, scenario outcome. */
export function renderScenarioPanel(view: StopView): string {
    const baselineRatio = view.baseline.gap_ratio_infinite
        ? 'inf'
        : formatNumber(view.baseline.gap_ratio ?? 0);
    const rows = [
        `<h3>${escape(view.name)} <small>(${escape(view.stop_id)})</small></h3>`,
        `<dl class="baseline">`,
        `<dt>riders</dt><dd data-field="riders">${formatNumber(view.baseline.riders, 0)}</dd>`,
        `<dt>routes ran</dt><dd data-field="routes">${formatNumber(view.baseline.routes, 0)}</dd>`,
        `<dt>riders/route</dt><dd data-field="gap-ratio">${baselineRatio}</dd>`,
        `<dt>status</dt><dd data-field="classification">${escape(view.baseline.classification ?? 'n/a')}</dd>`,
        `</dl>`,
        `<label>routes override <input type="range" class="routes-slider" ` +
        `data-stop-id="${escape(view.stop_id)}" min="0" max="${Math.ceil(view.baseline.routes * 3 + 10)}" ` +
        `step="1" value="${view.override_routes}"/> ` +
        `<span data-field="override">${formatNumber(view.override_routes, 0)}</span></label>`,
    ];
    if (view.error) {
        rows.push(`<p class="error" data-field="error">${escape(view.error)}</p>`);
    } else if (view.pending) {
        rows.push(`<p class="pending" data-field="pending">computing scenario...</p>`);
    } else if (view.scenario) {
        rows.push(
            `<dl class="scenario">`,
            `<dt>predicted demand</dt><dd data-field="predicted-demand">` +
            `${formatNumber(view.scenario.predicted_demand)}</dd>`,
            `<dt>demand gap</dt><dd data-field="demand-gap">` +
            `${formatNumber(view.scenario.demand_gap)}</dd>`,
            `<dt>scenario status</dt><dd data-field="scenario-classification">` +
            `${escape(view.scenario.classification)}</dd>`,
            `</dl>`
        );
    }
    return `<section class="scenario-panel" data-stop-id="${escape(view.stop_id)}">` +
        `${rows.join('')}</section>`;
}

export interface TemporalView {
    predictor: 'revenue_hours' | 'revenue_miles';
    value: number;
    predictedTrips: number | null;
    method: string | null;
    /** Two points from the service tracing the fitted line, if requested. */
    line: Array<{ value: number; trips: number }>;
    error: string | null;
}

/** Fitted line through two service-traced points plus the queried prediction. */
export function renderTemporalPanel(view: TemporalView, width = 520, height = 260): string {
    if (view.error) {
        return `<section class="temporal-panel"><p class="error" data-field="error">` +
            `${escape(view.error)}</p></section>`;
    }
    const parts: string[] = [];
    const points = [...view.line];
    if (view.predictedTrips !== null) {
        points.push({ value: view.value, trips: view.predictedTrips });
    }
    if (points.length > 0) {
        const values = points.map((p) => p.value);
        const trips = points.map((p) => p.trips);
        const minV = Math.min(...values), maxV = Math.max(...values);
        const minT = Math.min(...trips), maxT = Math.max(...trips);
        const sx = (v: number) =>
            maxV === minV ? width / 2 : ((v - minV) / (maxV - minV)) * (width - 40) + 20;
        const sy = (t: number) =>
            maxT === minT ? height / 2 : height - 20 - ((t - minT) / (maxT - minT)) * (height - 40);
        if (view.line.length === 2) {
            const [a, b] = view.line;
            parts.push(
                `<line class="link-line" x1="${sx(a.value).toFixed(1)}" y1="${sy(a.trips).toFixed(1)}" ` +
                `x2="${sx(b.value).toFixed(1)}" y2="${sy(b.trips).toFixed(1)}" ` +
                `stroke="#888" stroke-width="2"/>`
            );
        }
        if (view.predictedTrips !== null) {
            parts.push(
                `<circle class="prediction" cx="${sx(view.value).toFixed(1)}" ` +
                `cy="${sy(view.predictedTrips).toFixed(1)}" r="6" fill="#c0392b"/>`
            );
        }
    }
    const caption = view.predictedTrips === null
        ? ''
        : `<p data-field="predicted-trips">${formatNumber(view.predictedTrips)} trips at ` +
          `${formatNumber(view.value, 0)} ${escape(view.predictor)} ` +
          `<small>(${escape(view.method ?? '')})</small></p>`;
    return `<section class="temporal-panel">` +
        `<svg width="${width}" height="${height}">${parts.join('')}</svg>${caption}</section>`;
}
