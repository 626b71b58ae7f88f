import csv
from pathlib import Path

import pytest

from greensplit.cli import main, parse_plan, validate_plan
from greensplit.errors import ConfigError, DomainError

PLANS = Path(__file__).resolve().parent.parent / "plans"


def _rows(path):
    return list(csv.reader(open(path)))


def _bodies(out):
    return {p.name: p.read_bytes() for p in sorted(Path(out).glob("*.csv"))}


@pytest.fixture(scope="module")
def euclid_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("euclid")
    code = main(["analyze", "--plan", str(PLANS / "euclidean.ini"), "--out", str(out),
                 "--grid-scale", "0.5"])
    return code, out


def test_validate(capsys):
    assert main(["validate", "--plan", str(PLANS / "smoothed_cone.ini")]) == 0
    assert capsys.readouterr().out.startswith("ok ")
    assert main(["validate", "--plan", str(PLANS / "width_sweep.ini")]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_euclidean_analyze_is_exact(euclid_run):
    code, out = euclid_run
    assert code == 0
    manifest = (out / "MANIFEST").read_text()
    assert "incomplete" not in manifest and "error" not in manifest
    [hess] = out.glob("hessian_*.csv")
    for row in _rows(hess)[1:]:
        assert row[-1] == "1" and abs(float(row[6])) <= 1e-20  # holds, zero lhs
    [split] = out.glob("splitting_*.csv")
    head, row = _rows(split)
    vals = dict(zip(head, row))
    assert float(vals["hess_lhs"]) <= 1e-6 and float(vals["gram_lhs"]) <= 1e-6
    assert float(vals["sup_grad"]) == pytest.approx(1, abs=1e-3)
    [mono] = out.glob("monotone_*.csv")
    head, *rows = _rows(mono)
    assert "errA" in head and all(float(r[head.index("A")]) == pytest.approx(
        12.566370614, rel=1e-6) for r in rows)


def test_rows_carry_hash_and_grid(euclid_run):
    _, out = euclid_run
    for name in ("green", "hessian", "monotone", "splitting"):
        [p] = out.glob(f"{name}_*.csv")
        head, first = _rows(p)[:2]
        assert head[:2] == ["spec_hash", "grid"] and p.stem.endswith(first[0])
        assert any(h.startswith("err") for h in head) or name == "green"


def test_scale_hypothesis_rejected_before_solving(tmp_path, capsys):
    text = (PLANS / "smoothed_cone.ini").read_text().replace("s = 4", "s = 1")
    plan = tmp_path / "bad.ini"
    plan.write_text(text)
    assert main(["analyze", "--plan", str(plan), "--out", str(tmp_path / "o")]) == 2
    assert "below 2 r / b_inf" in capsys.readouterr().err
    assert not list((tmp_path / "o").glob("*.csv"))
    assert "validation failed" in (tmp_path / "o" / "MANIFEST").read_text()
    with pytest.raises(DomainError):
        validate_plan(parse_plan(text))


@pytest.mark.parametrize("edit, key", [
    (("kind = warped", "kind = blob"), "kind"),
    (("tasks = green", "tasks = greeen"), "[plan] tasks"),
    (("radii = 0.5 1 2", "radii = 0.5 x 2"), "[scales] radii"),
])
def test_bad_plan_exit_two(tmp_path, capsys, edit, key):
    text = (PLANS / "smoothed_cone.ini").read_text().replace(*edit)
    plan = tmp_path / "bad.ini"
    plan.write_text(text)
    assert main(["validate", "--plan", str(plan)]) == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(ConfigError) as exc:
        validate_plan(parse_plan(text))
    assert exc.value.key == key


def test_missing_plan_and_wrong_subcommand(tmp_path):
    assert main(["validate", "--plan", str(tmp_path / "none.ini")]) == 2
    assert main(["analyze", "--plan", str(PLANS / "width_sweep.ini")]) == 2
    assert main(["sweep", "--plan", str(PLANS / "euclidean.ini")]) == 2
    assert main(["analyze", "--plan", str(PLANS / "euclidean.ini"), "--grid-scale", "0"]) == 2


def test_module_error_exit_one(tmp_path, capsys):
    # a level far beyond the off-center grid fails inside the monotone task
    text = (PLANS / "smoothed_cone.ini").read_text()
    text = text.replace("tasks = green monotone hessian splitting gh", "tasks = monotone")
    text = text.replace("radii = 0.5 1 2 4 8 16", "radii = 1 1e13")
    plan = tmp_path / "p.ini"
    plan.write_text(text)
    assert main(["analyze", "--plan", str(plan), "--out", str(tmp_path / "o"),
                 "--grid-scale", "0.25"]) == 1
    assert "exceeds grid" in capsys.readouterr().err
    manifest = (tmp_path / "o" / "MANIFEST").read_text()
    assert "incomplete" in manifest and "DomainError" in manifest


def test_degenerate_splitting_poles_rejected(tmp_path):
    text = (PLANS / "euclidean.ini").read_text().replace("splitting = 0.5:-1 0.5:1",
                                                        "splitting = 0.5:1 0.5:1")
    plan = tmp_path / "p.ini"
    plan.write_text(text)
    assert main(["splitting", "--plan", str(plan), "--out", str(tmp_path / "o")]) == 2


def test_family_sweep_and_determinism(tmp_path):
    args = ["sweep", "--plan", str(PLANS / "width_sweep.ini"), "--grid-scale", "0.25",
            "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = _bodies(tmp_path / "a"), _bodies(tmp_path / "b")
    assert a == b and len(a) == 4 * 3 + 3
    for task in ("monotone", "splitting", "gh"):
        [p] = (tmp_path / "a").glob(f"sweep_{task}_*.csv")
        # splitting: one row per member; gh: one per scale; monotone: one per pole
        assert len(_rows(p)) == 1 + {"splitting": 4, "gh": 8, "monotone": 8}[task]
    [p] = (tmp_path / "a").glob("sweep_splitting_*.csv")
    params = [float(r[0]) for r in _rows(p)[1:]]
    assert params == [0.4, 0.2, 0.1, 0.05]
