import io

import pytest

from lpro.cli import RunConfig, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_check_worked_example(discourse_dir):
    code, out = run("check", str(discourse_dir / "worked.dis"))
    assert code == 0
    assert out.splitlines() == [
        "ENTAILED (budget 2)",
        "  z:he -> sk1:he (premise; introduced by x)",
        "mgu {X1/sk1}",
    ]


def test_check_with_trace(discourse_dir):
    code, out = run("check", str(discourse_dir / "worked.dis"), "--trace")
    assert code == 0 and "CLOSE: whistles(sk1^pro) / whistles(sk1) mgu {}" in out


def test_check_ill_formed(discourse_dir):
    code, out = run("check", str(discourse_dir / "gender_clash.dis"))
    assert code == 2 and "unresolvable pronoun y:she" in out


def test_check_not_proven(discourse_dir):
    code, out = run("check", str(discourse_dir / "scope_swap.dis"), "--budget", "8")
    assert code == 1 and out.startswith("NOT-PROVEN")


def test_missing_file_and_syntax_error(tmp_path):
    assert run("check", str(tmp_path / "nope.dis"))[0] == 3
    bad = tmp_path / "bad.dis"
    bad.write_text("forall x:he (\n")
    assert run("check", str(bad))[0] == 3


def test_bad_budget(discourse_dir):
    assert run("check", str(discourse_dir / "worked.dis"), "--budget", "0")[0] == 3
    with pytest.raises(ValueError):
        RunConfig("check", discourse_dir / "worked.dis", max_universe=0)


def test_signature_file(tmp_path):
    sig = tmp_path / "sig"
    sig.write_text("pred man/1\nconst buk:he\n")
    dis = tmp_path / "d.dis"
    dis.write_text("man(buk)\n|=\nexists x:he man(x)\n")
    assert run("check", str(dis), "--signature", str(sig))[0] == 0
    dis.write_text("woman(buk)\n|=\nman(buk)\n")
    assert run("check", str(dis), "--signature", str(sig))[0] == 3


def test_contexts_stops_at_the_conditional(discourse_dir):
    code, out = run("contexts", str(discourse_dir / "linguist_old.dis"))
    assert code == 2
    assert out.splitlines() == [
        "premise 1: input [] adds []",
        "premise 2: input [] UNDEFINED: unresolvable pronoun w:it",
    ]


def test_contexts_threading(discourse_dir):
    code, out = run("contexts", str(discourse_dir / "worked.dis"))
    assert code == 0
    assert "premise 2: input [x:he, y:he] adds []" in out


def test_modelcheck_pronoun_and_negation_commute(discourse_dir):
    code, out = run("modelcheck", str(discourse_dir / "pronoun_negation.dis"),
                    "--model", str(discourse_dir / "sleeps.model"),
                    "--context", "y:he,w:he", "--assign", "y=0,w=1")
    assert code == 0
    values = [line.split("\t")[0] for line in out.splitlines()]
    assert values == ["{1,0}", "{1,0}"]


def test_modelcheck_assignment_out_of_range(discourse_dir):
    code, _ = run("modelcheck", str(discourse_dir / "pronoun_negation.dis"),
                  "--model", str(discourse_dir / "sleeps.model"), "--context", "y:he", "--assign", "y=5")
    assert code == 3


def test_countermodel_for_scope_swap(discourse_dir):
    code, out = run("countermodel", str(discourse_dir / "scope_swap.dis"))
    assert code == 0 and out.startswith("COUNTERMODEL")
    sizes = [int(line.split()[1]) for line in out.splitlines() if line.startswith("universe")]
    assert sizes and max(sizes) <= 2


def test_no_countermodel(tmp_path):
    dis = tmp_path / "d.dis"
    dis.write_text("p(a:he)\n|=\np(a:he)\n")
    code, out = run("countermodel", str(dis))
    assert code == 1 and out.startswith("NO COUNTERMODEL up to size 2")


def test_translate(discourse_dir):
    code, out = run("translate", str(discourse_dir / "worked.dis"), "--trace")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "z:he -> x:he (premise)"
    assert lines[1] == "premises: exists x:he (man(x) & exists y:he (boy(y) & (sees(x, y) & whistles(x))))"
    assert lines[-1] == "crosscheck: closes"


def test_trace_lists_attempts(discourse_dir):
    code, out = run("trace", str(discourse_dir / "worked.dis"))
    assert code == 0
    assert out.splitlines()[1].startswith("# try z:he -> sk2^pro")


def test_output_is_deterministic(discourse_dir):
    assert run("trace", str(discourse_dir / "woman_cat.dis")) == run("trace", str(discourse_dir / "woman_cat.dis"))
