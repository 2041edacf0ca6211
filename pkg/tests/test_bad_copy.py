import pytest

from malcev import aoag, tfag
from malcev import bad_copy as bc
from malcev.linalg import Echelon, unit, vadd


@pytest.fixture(scope="module")
def group_run():
    P = tfag.standard_presentation(tfag.GroupSpec.full())
    return bc.run(P, bc.GroupConditionB(P), bc.guesser_suite(), 120)


def test_every_independent_answer_is_defeated(group_run):
    for req in group_run.state.requirements:
        if req.answer == bc.INDEPENDENT:
            assert req.status == "acted"
            assert bc.verify_defeated(group_run, req.e)
        assert not bc.wrongly_dependent(group_run, req.e)


def test_eager_and_threshold_act(group_run):
    by_name = {r.guesser.name: r for r in group_run.state.requirements}
    assert by_name["eager"].status == "acted"
    assert by_name["threshold"].status == "acted"
    assert by_name["oracle"].status != "acted"


def test_copy_is_isomorphic_to_the_structure(group_run):
    assert bc.pullback_check(group_run, 40)
    vals = group_run.state.values
    assert len(set(vals)) == len(vals)


def test_acts_once_and_logs_the_change(group_run):
    acts = [ev for ev in group_run.log if ev["event"] == "act"]
    assert len({ev["e"] for ev in acts}) == len(acts)
    for ev in acts:
        assert ev["old_witness"] != ev["new_image_of_a_e"]


def test_broken_guesser_is_contained(group_run):
    errors = [ev for ev in group_run.log if ev["event"] == "guesser_error"]
    assert errors
    broken = next(r for r in group_run.state.requirements if r.guesser.name == "broken")
    assert broken.status == "waiting"


def test_oracle_view_is_private():
    view = bc.BView(1, [unit(0)])
    with pytest.raises(PermissionError):
        view.exact_values()


def test_log_is_deterministic():
    P = tfag.standard_presentation(tfag.GroupSpec.full())
    a = bc.dumps_log(bc.run(P, bc.GroupConditionB(P), bc.guesser_suite(), 60).log)
    b = bc.dumps_log(bc.run(P, bc.GroupConditionB(P), bc.guesser_suite(), 60).log)
    assert a == b


def test_keeps_diagram_catches_collisions():
    vals = [unit(0), unit(1), vadd(unit(0), unit(1))]
    assert bc.keeps_diagram(vals, {1: unit(2), 2: vadd(unit(0), unit(2))})
    # the sum stops being a sum
    assert not bc.keeps_diagram(vals, {1: unit(2)})
    # two elements collide
    assert not bc.keeps_diagram(vals, {1: unit(0), 2: vadd(unit(0), unit(0))})


def test_ordered_copy_defeats_eager():
    P = aoag.standard_presentation()
    res = bc.run(P, bc.LogConditionB(P), [bc.EagerGuesser(), bc.OracleGuesser()], 80, anchors=2)
    eager = res.state.requirements[0]
    assert eager.status == "acted" and bc.verify_defeated(res, eager.e)
    assert bc.pullback_check(res, 30)


class _Liar:
    """Witness hook proposing values outside the span."""

    def __init__(self, P):
        self.inner = bc.GroupConditionB(P)

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def candidates(self, e, anchors, old):
        yield unit(10_000)


def test_invalid_witness_is_reported():
    P = tfag.standard_presentation(tfag.GroupSpec.full())
    with pytest.raises(bc.InvalidWitnessError) as info:
        bc.run(P, _Liar(P), [bc.EagerGuesser()], 20)
    assert info.value.record["e"] == 1
    assert not Echelon([unit(0)]).contains(unit(10_000))


def test_guesser_from_json_and_plugins():
    assert isinstance(bc.guesser_from_json({"kind": "threshold", "t": 3}), bc.ThresholdGuesser)
    g = bc.guesser_from_json({"kind": "plugin", "path": "sample_guessers:make_patient"})
    assert g.name == "patient"
    with pytest.raises(bc.PluginError):
        bc.guesser_from_json({"kind": "nope"})
    with pytest.raises(bc.PluginError):
        bc.load_plugin("sample_guessers:not_a_guesser")
    with pytest.raises(bc.PluginError):
        bc.load_plugin("no_such_module_here:x")
