"""Markdown and TSV rendering of evaluation results.

The main accuracy table has one row per method and one (category, +-Aux)
column pair per category; the per-column maximum is bold. The gains table
lists per-feature before/after/gain triples grouped by category.
"""

from __future__ import annotations

from .predict import EvalReport, GainRow

CATEGORY_LABELS = {"syntax": "Syntax", "phonology": "Phonology", "inventory": "Inventory"}
AUX_LABELS = {False: "-Aux", True: "+Aux"}


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_main_table(cells: dict[tuple[str, bool], dict[str, float]],
                      methods, categories=("syntax", "phonology", "inventory"),
                      aux_settings=(False, True)) -> str:
    """Markdown accuracy grid; ``cells`` maps (method, aux) -> category -> value."""
    methods = list(methods)
    categories = list(categories)
    aux_settings = list(aux_settings)
    columns = [(cat, aux) for cat in categories for aux in aux_settings]
    header = ["Method"] + [f"{CATEGORY_LABELS[c]} {AUX_LABELS[a]}" for c, a in columns]
    best: dict[tuple[str, bool], float] = {
        col: max(cells[(m, col[1])][col[0]] for m in methods) for col in columns
    }
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for method in methods:
        row = [method]
        for cat, aux in columns:
            value = cells[(method, aux)][cat]
            text = _fmt(value)
            if value == best[(cat, aux)]:
                text = f"**{text}**"
            row.append(text)
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def render_gains_table(rows_by_category: dict[str, list[GainRow]],
                       label_a: str = "None -Aux", label_b: str = "MTBoth -Aux") -> str:
    """Markdown gains table, categories stacked in syntax/phonology/inventory order."""
    lines = [
        f"| Feature | {label_a} | {label_b} | Gain |",
        "|---|---|---|---|",
    ]
    for category in ("syntax", "phonology", "inventory"):
        for row in rows_by_category.get(category, []):
            lines.append(
                f"| {row.feature} | {_fmt(row.before)} | {_fmt(row.after)} | {_fmt(row.gain)} |"
            )
    return "\n".join(lines) + "\n"


def render_report_markdown(report: EvalReport) -> str:
    return render_main_table(report.cells, report.methods, report.categories, report.aux_settings)


def write_report_tsv(path, report: EvalReport) -> None:
    """Flat accuracy dump: method, category, aux, accuracy."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method\tcategory\taux\taccuracy\n")
        for method in report.methods:
            for category in report.categories:
                for aux in report.aux_settings:
                    value = report.cells[(method, aux)][category]
                    fh.write(f"{method}\t{category}\t{AUX_LABELS[aux]}\t{value!r}\n")


def write_feature_accuracy_tsv(path, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method\taux\tfeature\taccuracy\n")
        for (method, aux), accs in sorted(report.feature_accuracy.items(),
                                          key=lambda kv: (kv[0][0], kv[0][1])):
            for feature in sorted(accs):
                fh.write(f"{method}\t{AUX_LABELS[aux]}\t{feature}\t{accs[feature]!r}\n")


def write_predictions_tsv(path, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method\taux\tlang\tfeature\tpred\tgold\n")
        for (method, aux), preds in sorted(report.predictions.items(),
                                           key=lambda kv: (kv[0][0], kv[0][1])):
            for (lang, feature), (pred, gold) in sorted(preds.items()):
                fh.write(f"{method}\t{AUX_LABELS[aux]}\t{lang}\t{feature}\t{pred}\t{gold}\n")


def read_predictions_tsv(path) -> dict[tuple[str, bool], dict[tuple[str, str], tuple[int, int]]]:
    out: dict[tuple[str, bool], dict[tuple[str, str], tuple[int, int]]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "method\taux\tlang\tfeature\tpred\tgold":
            raise ValueError(f"{path}: bad predictions header")
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            method, aux_s, lang, feature, pred, gold = line.split("\t")
            key = (method, aux_s == "+Aux")
            out.setdefault(key, {})[(lang, feature)] = (int(pred), int(gold))
    return out
