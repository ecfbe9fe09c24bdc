/**
 * Typed client for the scenario service. The dashboard performs no model
 * math of its own: every number it renders comes out of one of these
 * response bodies.
 */

export interface StopProfile {
    stop_pop: number;
    tvv: Record<string, number>;
    total_riders: number;
    city_routes_ran: number;
    empty_coverage: boolean;
}

export interface Stop {
    stop_id: string;
    name: string;
    lat: number;
    lon: number;
    profile: StopProfile;
    gap_ratio: number | null;
    gap_ratio_infinite: boolean;
    classification: string | null;
}

export interface SignificanceEntry {
    name: string;
    significance: number;
    direction: number;
    sign: 'positive' | 'negative';
}

export interface SignificanceReport {
    space: string;
    evaluation_points: number;
    features: SignificanceEntry[];
}

export interface SpatialPrediction {
    stop_id: string;
    predicted_supply: number;
    predicted_demand: number;
    actual_supply: number;
    actual_demand: number;
}

export interface ScenarioResult {
    stop_id: string;
    city_routes_ran: number;
    predicted_demand: number;
    demand_gap: number;
    classification: string;
}

export interface TemporalScenarioResponse {
    predicted_trips: number;
    method: string;
    reference_month?: string;
}

export interface GeoFeatureCollection {
    type: 'FeatureCollection';
    features: Array<{
        type: 'Feature';
        geometry: { type: 'Point'; coordinates: [number, number] };
        properties: Record<string, unknown>;
    }>;
}

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly code: string,
        message: string
    ) {
        super(message);
        this.name = 'ApiError';
    }
}

async function parseError(response: Response): Promise<ApiError> {
    try {
        const body = await response.json();
        return new ApiError(response.status, body.code ?? 'unknown', body.message ?? response.statusText);
    } catch {
        return new ApiError(response.status, 'unknown', response.statusText);
    }
}

export class ApiClient {
    constructor(private readonly base: string = '') {}

    private async get<T>(path: string): Promise<T> {
        const response = await fetch(this.base + path);
        if (!response.ok) {
            throw await parseError(response);
        }
        return response.json() as Promise<T>;
    }

    private async post<T>(path: string, body: unknown): Promise<T> {
        const response = await fetch(this.base + path, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
        });
        if (!response.ok) {
            throw await parseError(response);
        }
        return response.json() as Promise<T>;
    }

    health(): Promise<{ status: string }> {
        return this.get('/health');
    }

    stops(): Promise<Stop[]> {
        return this.get('/stops');
    }

    significance(model: 'temporal_demand' | 'spatial_demand'): Promise<SignificanceReport> {
        return this.get(`/significance?model=${model}`);
    }

    predictSpatial(stopId: string): Promise<SpatialPrediction> {
        return this.post('/predict/spatial', { stop_id: stopId });
    }

    /** One override per call: the dashboard adjusts a single stop's slider. */
    scenarioSpatial(stopId: string, cityRoutesRan: number): Promise<{ results: ScenarioResult[] }> {
        return this.post('/scenario/spatial', {
            overrides: [{ stop_id: stopId, city_routes_ran: cityRoutesRan }],
        });
    }

    scenarioTemporalLink(input: { revenue_hours?: number; revenue_miles?: number }): Promise<TemporalScenarioResponse> {
        return this.post('/scenario/temporal', { ...input, use_linear_link: true });
    }

    scenarioTemporalModel(input: { revenue_hours?: number; revenue_miles?: number }): Promise<TemporalScenarioResponse> {
        return this.post('/scenario/temporal', { ...input, use_linear_link: false });
    }

    coverage(): Promise<GeoFeatureCollection> {
        return this.get('/geo/coverage');
    }
}
