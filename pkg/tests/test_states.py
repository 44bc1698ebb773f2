from mis_lca.states import PASS, Phase1Status, Status, Verdict, fail


def test_phase1_status_text():
    assert str(Phase1Status.dominated(3)) == "dominated(3)"
    assert Phase1Status.in_mis().kind is Status.IN_MIS
    assert Phase1Status.residual() != Phase1Status.in_mis()


def test_verdicts():
    assert PASS and PASS.label == "Pass"
    v = fail("maximality violated at vertex 2")
    assert not v and v.to_dict() == {"verdict": "Fail", "reason": "maximality violated at vertex 2"}
    assert Verdict(True).to_dict() == {"verdict": "Pass", "reason": ""}
