"""Smoke test for the pynbhd extension module.

Build and install first, e.g. `maturin build --release` in crates/python and
`pip install` the resulting wheel, then run `python3 python/smoke_test.py`.
"""

import json
import pathlib

import pynbhd

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROOFS = ROOT / "crates" / "core" / "fixtures" / "proofs"


def main():
    f = pynbhd.parse("[1,2]((p|r)&(q|r))")
    assert f.atoms() == ["p", "q", "r"], f.atoms()
    assert pynbhd.Formula("p | ~p").is_tautology()

    m1 = pynbhd.Model.fixture("M1")
    assert m1.worlds() == ["wp", "wq", "wr"]
    assert not m1.satisfies("wp", f)
    assert m1.satisfies("wp", "[1](p|r) & [2](q|r)")
    assert m1.truth_set("p | r") == ["wp", "wr"]
    assert m1.check_schema("B3") is None
    assert m1.check_schema("B1") == "world wp, G={1}, H={2}, phi={wp,wr}, psi={wq,wr}"

    again = pynbhd.Model.from_json(m1.to_json())
    assert json.loads(again.to_json()) == json.loads(m1.to_json())

    nr = pynbhd.Model.fixture("NONREFLEXIVE")
    assert nr.check_condition("reflexive") is not None
    assert nr.check_schema("TG", range="definable", pool=[[1], [2]]) is None
    assert nr.check_schema("TG", range="definable", pool=[[1, 2]]) == "world w, G={1,2}, phi={}"
    assert [] in nr.group_neighbourhood([1, 2], "w")
    assert nr.close("supersets").check_condition("monotone") is None

    accepted, line, message = pynbhd.check_proof((PROOFS / "sa_from_nec.json").read_text())
    assert accepted and line is None, message

    found = pynbhd.countermodel(schema="cg", agents=[1], pool=[[1]])
    assert found is not None
    model, witness = found
    assert witness.startswith("world w0"), witness
    assert model.close("intersections").check_schema("cg", pool=[[1]]) is None

    assert pynbhd.countermodel(formula="[1]p -> p", seed=3, max_worlds=3) is not None
    assert pynbhd.fuzz(7, trials=200) == 0
    print("pynbhd smoke test passed")


if __name__ == "__main__":
    main()
