"""Typological feature matrix, language distances, and the k-NN baseline.

Features are binary and fall into three categories keyed by their name
prefix: syntax ("S_"), phonology ("P_"), phonetic inventory ("I_").
Missing cells are allowed and represented as NaN internally.

Feature CSV format: header ``lang,<feature names...>``, one row per
language, cells "0", "1", or empty for missing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusError, LanguageRecord, Registry

EARTH_RADIUS_KM = 6371.0

CATEGORIES = ("syntax", "phonology", "inventory")
_PREFIX_TO_CATEGORY = {"S_": "syntax", "P_": "phonology", "I_": "inventory"}


def category_of(feature_name: str) -> str:
    prefix = feature_name[:2]
    try:
        return _PREFIX_TO_CATEGORY[prefix]
    except KeyError:
        raise ValueError(f"feature {feature_name!r} has no category prefix (S_/P_/I_)") from None


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    category: str

    def __post_init__(self) -> None:
        if category_of(self.name) != self.category:
            raise ValueError(f"feature {self.name!r} prefix does not match category {self.category!r}")


class FeatureMatrix:
    """languages x features with values in {0, 1, missing(NaN)}."""

    def __init__(self, languages: list[str], features: list[FeatureSpec], values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(languages), len(features)):
            raise ValueError(f"values shape {values.shape} != ({len(languages)}, {len(features)})")
        valid = np.isnan(values) | (values == 0.0) | (values == 1.0)
        if not valid.all():
            raise ValueError("feature values must be 0, 1, or missing")
        self.languages = list(languages)
        self.features = list(features)
        self.values = values
        self._lang_index = {lang: i for i, lang in enumerate(self.languages)}
        self._feat_index = {f.name: j for j, f in enumerate(self.features)}
        if len(self._lang_index) != len(self.languages):
            raise ValueError("duplicate language rows")
        if len(self._feat_index) != len(self.features):
            raise ValueError("duplicate feature columns")

    def value(self, lang: str, feature: str) -> float:
        return float(self.values[self._lang_index[lang], self._feat_index[feature]])

    def column(self, feature: str) -> np.ndarray:
        return self.values[:, self._feat_index[feature]]

    def feature_names(self, category: str | None = None) -> list[str]:
        return [f.name for f in self.features if category is None or f.category == category]

    def category_counts(self) -> dict[str, int]:
        counts = {cat: 0 for cat in CATEGORIES}
        for f in self.features:
            counts[f.category] += 1
        return counts

    def non_missing_count(self, feature: str) -> int:
        return int(np.sum(~np.isnan(self.column(feature))))


def load_features(path, registry: Registry) -> FeatureMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty feature file") from None
        if not header or header[0] != "lang":
            raise CorpusError(f"{path}: first header column must be 'lang'")
        features = [FeatureSpec(name, category_of(name)) for name in header[1:]]
        languages: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CorpusError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            lang = row[0]
            if lang not in registry:
                raise CorpusError(f"{path}:{lineno}: unknown language {lang!r}")
            cells: list[float] = []
            for name, cell in zip(header[1:], row[1:]):
                if cell == "":
                    cells.append(math.nan)
                elif cell in ("0", "1"):
                    cells.append(float(cell))
                else:
                    raise CorpusError(f"{path}:{lineno}: feature {name} has value {cell!r}, "
                                      "expected 0, 1 or empty")
            languages.append(lang)
            rows.append(cells)
    try:
        return FeatureMatrix(languages, features, np.array(rows).reshape(len(languages), len(features)))
    except ValueError as exc:
        raise CorpusError(f"{path}: {exc}") from None


def write_features(path, matrix: FeatureMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lang"] + [f.name for f in matrix.features])
        for i, lang in enumerate(matrix.languages):
            row: list[str] = [lang]
            for v in matrix.values[i]:
                row.append("" if math.isnan(v) else str(int(v)))
            writer.writerow(row)


# --- distances ---------------------------------------------------------------

def geodesic_distance(a: LanguageRecord, b: LanguageRecord) -> float:
    """Great-circle (haversine) distance in kilometers, Earth radius 6371 km."""
    lat1, lon1, lat2, lon2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    s = (
        math.sin((lat2 - lat1) / 2.0) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(s)))


def genetic_distance(a: LanguageRecord, b: LanguageRecord) -> float:
    """Lineage dissimilarity: 1 - 2*|shared prefix| / (|a| + |b|)."""
    shared = 0
    for x, y in zip(a.lineage, b.lineage):
        if x != y:
            break
        shared += 1
    return 1.0 - 2.0 * shared / (len(a.lineage) + len(b.lineage))


@dataclass
class KnnConfig:
    k: int = 3
    geodesic_weight: float = 1.0
    genetic_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.geodesic_weight < 0 or self.genetic_weight < 0:
            raise ValueError("distance weights must be non-negative")
        if self.geodesic_weight == 0 and self.genetic_weight == 0:
            raise ValueError("at least one distance weight must be positive")


class DistanceContext:
    """Min-max normalization bounds over all distinct registry pairs."""

    def __init__(self, registry: Registry):
        records = list(registry)
        geo: list[float] = []
        gen: list[float] = []
        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                geo.append(geodesic_distance(records[i], records[j]))
                gen.append(genetic_distance(records[i], records[j]))
        self.geo_min = min(geo) if geo else 0.0
        self.geo_max = max(geo) if geo else 0.0
        self.gen_min = min(gen) if gen else 0.0
        self.gen_max = max(gen) if gen else 0.0

    def normalize_geo(self, d: float) -> float:
        span = self.geo_max - self.geo_min
        return (d - self.geo_min) / span if span > 0 else 0.0

    def normalize_gen(self, d: float) -> float:
        span = self.gen_max - self.gen_min
        return (d - self.gen_min) / span if span > 0 else 0.0


def combined_distance(a: LanguageRecord, b: LanguageRecord, context: DistanceContext,
                      config: KnnConfig | None = None) -> float:
    """Weighted mean of min-max normalized geodesic and genetic distances.

    Identical records are at distance 0; a degenerate component (all registry
    pairs equal) contributes 0.
    """
    config = config or KnnConfig()
    if a.code == b.code:
        return 0.0
    ngeo = context.normalize_geo(geodesic_distance(a, b))
    ngen = context.normalize_gen(genetic_distance(a, b))
    wsum = config.geodesic_weight + config.genetic_weight
    return (config.geodesic_weight * ngeo + config.genetic_weight * ngen) / wsum


def nearest_neighbors(lang: str, matrix: FeatureMatrix, registry: Registry,
                      config: KnnConfig, context: DistanceContext | None = None) -> list[str]:
    """The k nearest other languages by combined distance; distance ties are
    broken lexicographically by language code."""
    context = context or DistanceContext(registry)
    target = registry[lang]
    candidates = [code for code in matrix.languages if code != lang]
    if len(candidates) < config.k:
        raise ValueError(f"{lang}: need at least {config.k} candidate languages, have {len(candidates)}")
    ranked = sorted(
        candidates,
        key=lambda code: (combined_distance(target, registry[code], context, config), code),
    )
    return ranked[: config.k]


def knn_feature_vector(lang: str, matrix: FeatureMatrix, registry: Registry,
                       config: KnnConfig | None = None,
                       context: DistanceContext | None = None) -> np.ndarray:
    """Average feature vector of the language's k nearest neighbors.

    Per feature, neighbors missing that feature are skipped (the divisor
    shrinks); if all k are missing, falls back to the global non-missing
    mean over all other languages, and to 0.5 if that is empty too. The
    target language's own row is never used.
    """
    config = config or KnnConfig()
    neighbors = nearest_neighbors(lang, matrix, registry, config, context)
    self_idx = matrix.languages.index(lang)
    out = np.empty(len(matrix.features))
    for j, feat in enumerate(matrix.features):
        vals = [matrix.value(nb, feat.name) for nb in neighbors]
        vals = [v for v in vals if not math.isnan(v)]
        if vals:
            out[j] = sum(vals) / len(vals)
            continue
        column = np.delete(matrix.values[:, j], self_idx)
        column = column[~np.isnan(column)]
        out[j] = float(column.mean()) if len(column) else 0.5
    return out


def majority_value(values) -> int:
    """Most common value among non-missing entries; ties go to 1."""
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        raise ValueError("all values missing")
    ones = sum(1 for v in vals if v == 1.0)
    return 1 if ones >= len(vals) - ones else 0

def majority_rate(feature: str, matrix: FeatureMatrix, languages=None) -> float:
    """Accuracy in [0,1] of always predicting the feature's most common value."""
    languages = matrix.languages if languages is None else list(languages)
    vals = [matrix.value(lang, feature) for lang in languages]
    vals = [v for v in vals if not math.isnan(v)]
    if not vals:
        raise ValueError(f"{feature}: all values missing in subset")
    maj = majority_value(vals)
    return sum(1 for v in vals if v == maj) / len(vals)


def write_distance_dump(path, registry: Registry, config: KnnConfig | None = None) -> None:
    """Optional TSV dump: langA langB geodesic genetic combined."""
    config = config or KnnConfig()
    context = DistanceContext(registry)
    records = list(registry)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("langA\tlangB\tgeodesic\tgenetic\tcombined\n")
        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                a, b = records[i], records[j]
                fh.write(
                    f"{a.code}\t{b.code}\t{geodesic_distance(a, b)!r}\t"
                    f"{genetic_distance(a, b)!r}\t{combined_distance(a, b, context, config)!r}\n"
                )
