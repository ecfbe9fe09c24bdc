/**
 * Browser bootstrap: wires the pure state/render modules to the DOM.
 * Served as a static page next to the scenario service.
 */

import { ApiClient, GeoFeatureCollection, SignificanceReport } from './api.js';
import { Dashboard } from './dashboard.js';
import {
    renderScenarioPanel,
    renderSignificance,
    renderStopMap,
    renderTemporalPanel,
    TemporalView,
} from './render.js';

const api = new ApiClient('');
const dashboard = new Dashboard(api);

let coverage: GeoFeatureCollection | null = null;
let significance: SignificanceReport | null = null;
let significanceModel: 'temporal_demand' | 'spatial_demand' = 'spatial_demand';
let selectedStop: string | null = null;
const temporal: TemporalView = {
    predictor: 'revenue_hours',
    value: 3000,
    predictedTrips: null,
    method: null,
    line: [],
    error: null,
};

function element(id: string): HTMLElement {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing #${id}`);
    }
    return node;
}

function redraw(): void {
    const views = dashboard.stops();
    if (dashboard.loadError) {
        element('map').innerHTML =
            `<p class="error">service unavailable: ${dashboard.loadError}</p>`;
        element('panels').innerHTML = '';
        return;
    }
    element('map').innerHTML = renderStopMap(views, coverage);
    const selected = views.find((v) => v.stop_id === selectedStop) ?? views[0];
    element('panels').innerHTML = selected ? renderScenarioPanel(selected) : '';
    if (significance) {
        element('significance').innerHTML = renderSignificance(significance);
    }
    element('temporal').innerHTML = renderTemporalPanel(temporal);
    bindControls();
}

function bindControls(): void {
    for (const node of document.querySelectorAll<SVGElement>('circle.stop')) {
        node.addEventListener('click', () => {
            selectedStop = node.dataset.stopId ?? null;
            redraw();
        });
    }
    for (const slider of document.querySelectorAll<HTMLInputElement>('input.routes-slider')) {
        slider.addEventListener('input', () => {
            const stopId = slider.dataset.stopId;
            if (stopId) {
                void dashboard.setOverride(stopId, Number(slider.value));
            }
        });
    }
}

async function refreshTemporal(): Promise<void> {
    temporal.error = null;
    try {
        const span = temporal.predictor === 'revenue_hours' ? [2400, 4200] : [40000, 62000];
        const [lo, hi, at] = await Promise.all([
            api.scenarioTemporalLink({ [temporal.predictor]: span[0] }),
            api.scenarioTemporalLink({ [temporal.predictor]: span[1] }),
            api.scenarioTemporalLink({ [temporal.predictor]: temporal.value }),
        ]);
        temporal.line = [
            { value: span[0], trips: lo.predicted_trips },
            { value: span[1], trips: hi.predicted_trips },
        ];
        temporal.predictedTrips = at.predicted_trips;
        temporal.method = at.method;
    } catch (error) {
        temporal.predictedTrips = null;
        temporal.line = [];
        temporal.error = String(error);
    }
    redraw();
}

async function start(): Promise<void> {
    dashboard.onChange(redraw);
    await dashboard.load();
    try {
        coverage = await api.coverage();
        significance = await api.significance(significanceModel);
    } catch {
        coverage = coverage ?? null;
        significance = significance ?? null;
    }
    element('temporal-value').addEventListener('change', (event) => {
        temporal.value = Number((event.target as HTMLInputElement).value);
        void refreshTemporal();
    });
    element('temporal-predictor').addEventListener('change', (event) => {
        temporal.predictor = (event.target as HTMLSelectElement)
            .value as TemporalView['predictor'];
        void refreshTemporal();
    });
    element('significance-model').addEventListener('change', async (event) => {
        significanceModel = (event.target as HTMLSelectElement)
            .value as typeof significanceModel;
        try {
            significance = await api.significance(significanceModel);
        } catch (error) {
            significance = null;
        }
        redraw();
    });
    await refreshTemporal();
}

void start();
