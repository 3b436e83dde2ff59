"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The synthetic end-to-end run (criteria A5/A6) trains the translation model
once per session at the pinned scale (40 languages x 500 sentences, H=E=64,
300 merges, 10 epochs) and takes a few minutes; everything else is fast.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from typovec import autograd as ag
from typovec.autograd import backward
from typovec.bpe import build_vocab, encode_corpus, learn_bpe
from typovec.cli import main
from typovec.corpus import CorpusStore, LanguageRecord, Registry, SentencePair
from typovec.models import LSTMCellParams, Seq2SeqModel, TrainConfig, lstm_step
from typovec.predict import (
    GainRow,
    LogRegModel,
    evaluate,
    export_trajectory,
    make_folds,
    paired_bootstrap,
)
from typovec.report import render_gains_table, render_main_table
from typovec.synth import generate_suite
from typovec.training import _Row, _nmt_batch_loss, perplexity, train_nmt
from typovec.typology import DistanceContext, FeatureMatrix, FeatureSpec, KnnConfig, knn_feature_vector
from typovec.vectors import combine_mtboth, extract_mtcell, extract_mtvec

from oracles import (
    brute_force_knn_vector,
    brute_force_learn_bpe,
    finite_difference_grads,
    max_relative_error,
)

DATA = Path(__file__).parent / "data"
SEED = 20250810


@pytest.fixture
def record(capsys):
    def _record(cid: str, description: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        with capsys.disabled():
            print(f"[{status}] {cid} {description}" + (f": {detail}" if detail else ""))
        assert passed, f"{cid} {description}: {detail}"

    return _record


# --- A1: gradient correctness -------------------------------------------------

def test_a1_gradient_correctness(record):
    rng = np.random.default_rng(101)

    # full LSTM step, H = E = 8
    cell = LSTMCellParams.create("cell", 8, 8, rng)
    x = rng.uniform(-1, 1, size=8)
    h0 = rng.uniform(-1, 1, size=8)
    c0 = rng.uniform(-1, 1, size=8)
    probe = rng.uniform(-1, 1, size=8)

    def step_loss() -> float:
        h, c = lstm_step(cell, ag.constant(x), ag.constant(h0), ag.constant(c0))
        mix = ag.add(ag.mul(h, ag.constant(probe)), ag.mul(c, ag.constant(probe)))
        return float(ag.reduce_sum(mix).value)

    h, c = lstm_step(cell, ag.constant(x), ag.constant(h0), ag.constant(c0))
    mix = ag.add(ag.mul(h, ag.constant(probe)), ag.mul(c, ag.constant(probe)))
    backward(ag.reduce_sum(mix))
    fd = finite_difference_grads(step_loss, cell.parameters(), h=1e-5)
    step_err = max(max_relative_error(p.grad, fd[p.name]) for p in cell.parameters())

    # full seq2seq teacher-forced loss, H = E = 8, vocab 20
    model = Seq2SeqModel(20, TrainConfig(hidden_size=8, embed_size=8, epochs=1, seed=5), rng)
    rows = [
        _Row([16, 5, 7, 9, 2], [1, 11, 12], [11, 12, 2]),
        _Row([17, 8, 2], [1, 13, 14, 15], [13, 14, 15, 2]),
    ]

    def seq_loss() -> float:
        loss, n = _nmt_batch_loss(model, rows, rng, 0.0)
        return float(loss.value) / n

    for p in model.parameters():
        p.zero_grad()
    loss, n = _nmt_batch_loss(model, rows, rng, 0.0)
    backward(ag.scale(loss, 1.0 / n))
    fd = finite_difference_grads(seq_loss, model.parameters(), h=1e-5)
    seq_err = max(max_relative_error(p.grad, fd[p.name]) for p in model.parameters())

    worst = max(step_err, seq_err)
    record("A1", "autodiff matches central finite differences (rel err <= 1e-4)",
           worst <= 1e-4, f"lstm={step_err:.2e} seq2seq={seq_err:.2e}")


# --- A2: BPE oracle equivalence -----------------------------------------------

def test_a2_bpe_oracle_equivalence(record):
    rng = np.random.default_rng(202)
    alphabet = "abcdefg"
    mismatches = []
    for trial in range(20):
        n_types = int(rng.integers(2, 101))
        words: dict[str, int] = {}
        for _ in range(n_types):
            length = int(rng.integers(1, 9))
            w = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), length))
            words[w] = int(rng.integers(1, 10))
        n_merges = int(rng.integers(1, 21))
        got = learn_bpe(dict(words), n_merges).pairs
        expect = brute_force_learn_bpe(words, n_merges)
        if got != expect:
            mismatches.append(trial)
    record("A2", "learn_bpe equals recount-every-step oracle on 20 random corpora",
           not mismatches, f"mismatching trials: {mismatches}" if mismatches else "20/20 exact")


# --- A3: k-NN oracle equivalence ----------------------------------------------

def test_a3_knn_oracle_equivalence(record):
    rng = np.random.default_rng(303)
    lineages = [("F1", "B1"), ("F1", "B2"), ("F1", "B1", "C1"), ("F2",), ("F2", "B1"), ("F3", "B1")]
    mismatches = []
    for trial in range(20):
        n = int(rng.integers(5, 51))
        codes = [f"l{i:02d}" for i in range(n)]
        records = {
            code: (
                float(rng.integers(0, 4) * 15),  # grid coordinates force ties
                float(rng.integers(0, 4) * 15),
                lineages[int(rng.integers(len(lineages)))],
            )
            for code in codes
        }
        n_feats = int(rng.integers(1, 6))
        values = rng.integers(0, 2, size=(n, n_feats)).astype(float)
        values[rng.random((n, n_feats)) < 0.35] = math.nan
        registry = Registry([LanguageRecord(c, records[c][2], records[c][0], records[c][1])
                             for c in codes])
        matrix = FeatureMatrix(codes, [FeatureSpec(f"S_F{i}", "syntax") for i in range(n_feats)], values)
        context = DistanceContext(registry)
        for lang in codes:
            mine = knn_feature_vector(lang, matrix, registry, KnnConfig(k=3), context)
            oracle = brute_force_knn_vector(lang, records, codes, values, k=3)
            if not np.array_equal(mine, oracle):
                mismatches.append((trial, lang))
    record("A3", "knn_feature_vector equals full-sort oracle on 20 random registries",
           not mismatches, f"mismatches: {mismatches[:3]}" if mismatches else "20/20 exact")


# --- A4: overfit sanity ---------------------------------------------------------

def test_a4_single_pair_overfit(record):
    registry = Registry([LanguageRecord("deu", ("G",), 51.0, 10.0)])
    store = CorpusStore()
    store.add(SentencePair("deu", tuple("der grosse hund sieht die kleine katze".split()),
                           tuple("the big dog sees the small cat".split())))
    merges = learn_bpe(store, 10)
    vocab = build_vocab(store, merges, registry)
    encoded = encode_corpus(store, merges, vocab)
    config = TrainConfig(hidden_size=32, embed_size=32, lr=0.02, dropout=0.0,
                         epochs=200, batch_size=1, seed=7)
    model, curve = train_nmt(encoded, vocab, config)
    ppl = perplexity(model, encoded, vocab)
    uniform = math.log(len(vocab))
    first_ok = abs(curve[0] - uniform) / uniform <= 0.05
    record("A4", "single-pair NMT overfits (ppl <= 1.1, first epoch ~ ln V)",
           ppl <= 1.1 and first_ok,
           f"ppl={ppl:.4f}, epoch-1 loss {curve[0]:.4f} vs ln V {uniform:.4f}")


# --- A5/A6: synthetic end-to-end ------------------------------------------------

@pytest.fixture(scope="module")
def synth_report():
    suite = generate_suite(40, 500, seed=SEED)
    merges = learn_bpe(suite.corpus, 300)
    vocab = build_vocab(suite.corpus, merges, suite.registry)
    encoded = encode_corpus(suite.corpus, merges, vocab)
    config = TrainConfig(hidden_size=64, embed_size=64, lr=0.002, dropout=0.1,
                         epochs=10, batch_size=64, seed=SEED)
    nmt, _curve = train_nmt(encoded, vocab, config)
    langs = sorted(encoded.by_lang)
    vectors = {"MTVec": {}, "MTCell": {}, "MTBoth": {}}
    for lang in langs:
        mtvec = extract_mtvec(nmt, vocab, lang)
        mtcell = extract_mtcell(nmt, encoded, vocab, lang)
        vectors["MTVec"][lang] = mtvec
        vectors["MTCell"][lang] = mtcell
        vectors["MTBoth"][lang] = combine_mtboth(mtvec, mtcell)
    context = DistanceContext(suite.registry)
    knn = {lang: knn_feature_vector(lang, suite.features, suite.registry, KnnConfig(3), context)
           for lang in langs}
    folds = make_folds(langs, 10, seed=SEED)
    return evaluate(suite.features, vectors, folds,
                    ["None", "MTVec", "MTCell", "MTBoth"], (False, True), knn, l2=1.0)


def test_a5_synthetic_end_to_end_signal(record, synth_report):
    obv = "S_OBJECT_BEFORE_VERB"
    mtboth = synth_report.feature_accuracy[("MTBoth", False)][obv]
    chance = synth_report.feature_accuracy[("None", False)][obv]
    knn_acc = synth_report.feature_accuracy[("None", True)][obv]
    ok = mtboth >= 85.0 and chance == 50.0 and knn_acc <= 65.0
    record("A5", "40-language suite: MTBoth -Aux on S_OBJECT_BEFORE_VERB >= 85%",
           ok, f"MTBoth={mtboth:.2f} chance={chance:.2f} knn={knn_acc:.2f}")


def test_a6_method_ordering(record, synth_report):
    mtboth = synth_report.cell("MTBoth", "syntax", False)
    mtvec = synth_report.cell("MTVec", "syntax", False)
    chance = synth_report.cell("None", "syntax", False)
    ok = (mtboth >= mtvec - 2.0) and (mtvec >= chance - 2.0)
    record("A6", "syntax means ordered MTBoth >= MTVec >= chance (2-pt ties allowed)",
           ok, f"MTBoth={mtboth:.2f} MTVec={mtvec:.2f} chance={chance:.2f}")


# --- A7: report layout fixtures --------------------------------------------------

def test_a7_table_fixtures_render_byte_identically(record):
    cells = {
        ("None", False): {"syntax": 69.91, "phonology": 77.92, "inventory": 85.17},
        ("None", True): {"syntax": 83.07, "phonology": 86.59, "inventory": 90.68},
        ("LMVec", False): {"syntax": 71.32, "phonology": 80.80, "inventory": 87.51},
        ("LMVec", True): {"syntax": 82.94, "phonology": 86.74, "inventory": 89.94},
        ("MTVec", False): {"syntax": 74.90, "phonology": 82.41, "inventory": 89.62},
        ("MTVec", True): {"syntax": 83.31, "phonology": 87.64, "inventory": 90.94},
        ("MTCell", False): {"syntax": 75.91, "phonology": 84.33, "inventory": 90.01},
        ("MTCell", True): {"syntax": 85.14, "phonology": 88.80, "inventory": 90.85},
        ("MTBoth", False): {"syntax": 77.11, "phonology": 85.77, "inventory": 90.06},
        ("MTBoth", True): {"syntax": 86.33, "phonology": 89.04, "inventory": 91.03},
    }
    main_md = render_main_table(cells, ["None", "LMVec", "MTVec", "MTCell", "MTBoth"])
    golden_main = (DATA / "table_main.golden.md").read_text(encoding="utf-8")

    gains = {
        "syntax": [
            GainRow("S_NUMERAL_AFTER_NOUN", 37.40, 81.26, 43.86),
            GainRow("S_NUMERAL_BEFORE_NOUN", 46.49, 83.22, 36.73),
            GainRow("S_POSSESSOR_AFTER_NOUN", 42.05, 75.60, 33.55),
            GainRow("S_OBJECT_BEFORE_VERB", 50.97, 80.89, 29.92),
            GainRow("S_ADPOSITION_AFTER_NOUN", 52.41, 79.10, 26.69),
        ],
        "phonology": [
            GainRow("P_UVULAR_CONTINUANTS", 77.57, 97.37, 19.80),
            GainRow("P_LATERALS", 67.30, 86.48, 19.18),
            GainRow("P_LATERAL_L", 64.05, 78.16, 14.10),
            GainRow("P_LABIAL_VELARS", 82.16, 95.93, 13.76),
            GainRow("P_VELAR_NASAL_INITIAL", 72.14, 85.82, 13.68),
        ],
        "inventory": [
            GainRow("I_VELAR_NASAL", 39.89, 62.08, 22.20),
            GainRow("I_ALVEOLAR_LATERAL_APPROXIMANT", 60.92, 79.32, 18.40),
            GainRow("I_ALVEOLAR_NASAL", 81.49, 92.98, 11.48),
            GainRow("I_VOICED_LABIODENTAL_FRICATIVE", 65.75, 77.10, 11.36),
            GainRow("I_VOICELESS_PALATAL_FRICATIVE", 82.41, 93.66, 11.25),
        ],
    }
    gains_md = render_gains_table(gains)
    golden_gains = (DATA / "table_gains.golden.md").read_text(encoding="utf-8")

    ok = main_md == golden_main and gains_md == golden_gains
    record("A7", "report renderer reproduces the reference table layouts byte-identically",
           ok, "both tables byte-identical" if ok else "layout drift detected")


# --- A8: bootstrap sanity --------------------------------------------------------

def test_a8_bootstrap_sanity(record):
    gold = np.ones(200, dtype=int)
    same = np.concatenate([np.ones(150, dtype=int), np.zeros(50, dtype=int)])
    identical = paired_bootstrap(same, same, gold, n=10000, seed=1)
    dominant = paired_bootstrap(np.zeros(200, dtype=int), np.ones(200, dtype=int),
                                gold, n=10000, seed=2)
    twice = paired_bootstrap(same, np.ones(200, dtype=int), gold, n=10000, seed=3)
    again = paired_bootstrap(same, np.ones(200, dtype=int), gold, n=10000, seed=3)
    ok = (identical.p_value >= 0.999 and dominant.p_value <= 0.001
          and twice.p_value == again.p_value)
    record("A8", "paired bootstrap: identical -> p ~ 1, dominance -> p <= 0.001, seeded",
           ok, f"p_same={identical.p_value} p_dom={dominant.p_value} "
               f"repeat agreement={twice.p_value == again.p_value}")


# --- A9: end-to-end determinism ----------------------------------------------------

def _determinism_config(tmp_path: Path, name: str) -> Path:
    workdir = tmp_path / name
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(
        "\n".join([
            f"workdir={workdir}",
            "seed=4242",
            "synth_langs=12",
            "synth_sentences=15",
            "synth_lexicon=12",
            "num_merges=40",
            "hidden_size=8",
            "embed_size=8",
            "lr=0.02",
            "dropout=0.2",
            "epochs=2",
            "batch_size=8",
            "n_folds=4",
            "bootstrap_n=1000",
            "methods=LMVec,MTVec,MTCell,MTBoth",
            "traj_sentences=3",
        ]) + "\n",
        encoding="utf-8",
    )
    return cfg


def test_a9_pipeline_determinism(record, tmp_path):
    stages = ("synth", "ingest", "bpe-learn", "train-lm", "train-nmt",
              "extract", "baseline", "predict", "report", "bootstrap", "traj")
    outputs = {}
    for name in ("run_a", "run_b"):
        cfg = _determinism_config(tmp_path, name)
        for stage in stages:
            assert main(["--config", str(cfg), stage]) == 0, f"{name}:{stage}"
        work = tmp_path / name
        outputs[name] = {
            f.name: f.read_bytes()
            for f in sorted(work.iterdir())
            if f.name.startswith("vectors_") or f.name in
            ("report.tsv", "feature_accuracy.tsv", "predictions.tsv", "table_main.md",
             "table_gains.md", "bootstrap.txt", "trajectory.csv")
        }
    same_names = set(outputs["run_a"]) == set(outputs["run_b"])
    diffs = [n for n in outputs["run_a"] if outputs["run_a"][n] != outputs["run_b"].get(n)]
    ok = same_names and not diffs and len(outputs["run_a"]) >= 6
    record("A9", "two identical pipeline runs are byte-identical",
           ok, f"compared {len(outputs['run_a'])} artifacts" + (f", diffs: {diffs}" if diffs else ""))


# --- A10: trajectory consistency -----------------------------------------------------

def test_a10_trajectory_matches_mtcell(record, small_registry, small_corpus):
    merges = learn_bpe(small_corpus, 12)
    vocab = build_vocab(small_corpus, merges, small_registry)
    encoded = encode_corpus(small_corpus, merges, vocab)
    model = Seq2SeqModel(len(vocab), TrainConfig(hidden_size=6, epochs=1, seed=8),
                         np.random.default_rng(8))
    weights = np.array([0.3, -1.4, 0.2, 0.9, 0.0, -0.1])
    logreg = LogRegModel(weights, 0.0)
    node, rows = export_trajectory(model, logreg, encoded, vocab, sorted(encoded.by_lang))
    worst = 0.0
    for lang in sorted(encoded.by_lang):
        series = [v for l, _, _, v in rows if l == lang]
        expected_len = sum(len(p.source_ids) + 2 for p in encoded.by_lang[lang])
        assert len(series) == expected_len
        mtcell = extract_mtcell(model, encoded, vocab, lang)
        worst = max(worst, abs(float(np.mean(series)) - mtcell.values[node]))
    record("A10", "exported node series mean equals the MTCell coordinate (<= 1e-10)",
           worst <= 1e-10, f"node={node}, worst |diff|={worst:.2e}")
