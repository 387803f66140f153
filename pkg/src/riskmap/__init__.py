"""riskmap: call-record driven risk mapping for vector-borne disease screening.

The pipeline turns raw call detail records into per-antenna risk layers:
ingest and activity-filter the records, build the client communication
graph, infer each user's home antenna from weekday-night calls, tag users
with social ties into an endemic zone, aggregate per-antenna indicators,
and export filtered heatmap circle layers. A seeded synthetic generator
provides ground truth for every stage.
"""

__version__ = "0.1.0"
