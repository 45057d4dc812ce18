"""Smoke test for the manego extension module.

Build and install first, e.g. `maturin develop` inside crates/py.
"""

import manego

EXAMPLE = """\
rule: borda
other: b p a c
team:
p c a b
p b a c
b p a c
b a c p
"""


def main():
    inst = manego.parse_instance(EXAMPLE)
    assert inst.rule == "borda"
    assert manego.parse_instance(str(inst)).team == inst.team

    assert manego.scores(inst.team, inst.rule) == {"a": 5, "b": 8, "c": 3, "p": 8}
    assert manego.swf(inst.team, inst.rule) == ["b", "p", "a", "c"]

    assert manego.rc(["p", "a", "b", "c"], ["b", "p", "a", "c"]) == (2, ["p"])
    assert manego.spe(["p", "b", "a", "c"], ["b", "p", "a", "c"]) == "b"
    assert manego.spe(["p", "b", "a", "c"], ["b", "p", "a", "c"], initiator="other") == "p"

    result = manego.manipulate(inst.team, inst.other, inst.rule, "constructive", "p")
    assert result.decision == "yes" and result
    assert result.votes == [["a", "p", "c", "b"]]
    assert any(line.startswith("decision:") for line in result.trace)

    oracle = manego.brute_force(inst.team, inst.other, inst.rule, "constructive", "p", k=2)
    assert oracle.decision == "yes"

    assert manego.permutation_sum([3, 3]) == ([1, 2], [2, 1])
    assert manego.permutation_sum([1, 5]) is None
    assert len(manego.orders(["x", "y", "z"])) == 6

    try:
        manego.parse_instance(EXAMPLE.replace("b a c p", "b a c"))
    except ValueError as e:
        assert "line 7" in str(e)
    else:
        raise AssertionError("expected a parse error")

    print("smoke test passed")


if __name__ == "__main__":
    main()
