import random

import pytest

from bigengine import (
    MatchConstraint,
    check_constraints,
    count_occurrences,
    find_occurrences,
    identity,
    iso_equal,
    make_atom,
    matches_predicate,
    merge,
    nest,
    one,
    parallel,
)
from bigengine.bigraph import Control, Signature
from bigengine.elaborate import load_file
from bigengine.errors import PatternNotSolid, TargetNotGround
from bigengine.matching import recompose

from conftest import MODELS
from genutil import DEFAULT_CONTROLS, brute_images, make_sig, matcher_images, random_ground, random_solid_pattern


@pytest.fixture
def server_sig():
    return Signature([
        Control("Server", 0),
        Control("Data", 0, atomic=True),
        Control("Room", 0),
        Control("Intruder", 0, atomic=True),
        Control("Camera", 0, atomic=True),
        Control("Entrance", 0, atomic=True),
    ])


def test_site_absorbs_contents(server_sig):
    target = nest(make_atom(server_sig, "Server"),
                  merge(make_atom(server_sig, "Data"), make_atom(server_sig, "Data")))
    pattern = make_atom(server_sig, "Server")        # Server.id
    occs = find_occurrences(target, pattern)
    assert len(occs) == 1
    (param,) = occs[0].parameter
    assert param.is_ground()
    assert sorted(param.ctrl) == ["Data", "Data"]


def test_control_mismatch(server_sig):
    target = nest(make_atom(server_sig, "Room"), make_atom(server_sig, "Data"))
    pattern = nest(make_atom(server_sig, "Room"), make_atom(server_sig, "Camera"))
    assert find_occurrences(target, pattern) == []


def test_exact_children_without_site(server_sig):
    # Server.Data (no site) must not match a server with two Data
    target = nest(make_atom(server_sig, "Server"),
                  merge(make_atom(server_sig, "Data"), make_atom(server_sig, "Data")))
    pattern = nest(make_atom(server_sig, "Server"), make_atom(server_sig, "Data"))
    assert find_occurrences(target, pattern) == []


def detect_room(sig, cameras):
    inner = make_atom(sig, "Intruder")
    for _ in range(cameras):
        inner = merge(inner, make_atom(sig, "Camera"))
    return nest(make_atom(sig, "Room"), inner)


def detect_pattern(sig):
    return nest(make_atom(sig, "Room"),
                merge(merge(make_atom(sig, "Intruder"), make_atom(sig, "Camera")),
                      identity(sig)))


def test_count_occurrences(server_sig):
    pattern = detect_pattern(server_sig)
    two_rooms = merge(detect_room(server_sig, 1), detect_room(server_sig, 1))
    assert count_occurrences(two_rooms, pattern) == 2
    assert count_occurrences(nest(make_atom(server_sig, "Room"), one(server_sig)),
                             pattern) == 0
    assert count_occurrences(detect_room(server_sig, 1), pattern) == 1
    assert count_occurrences(detect_room(server_sig, 2), pattern) == 2


def test_leave_secure_unique_occurrence():
    spec = load_file(MODELS / "leave_secure.big")
    rule = next(spec.rules())
    occs = find_occurrences(spec.init, rule.lhs)
    assert len(occs) == 1


def test_matches_predicate_secure_building():
    spec = load_file(MODELS / "secure_building.big")
    assert matches_predicate(spec.init, spec.preds["entrance"])
    assert not matches_predicate(spec.init, spec.preds["seen"])
    assert not matches_predicate(spec.init, spec.preds["serverRoom"])


def test_self_match(server_sig):
    state = detect_room(server_sig, 1)
    assert matches_predicate(state, state)


def test_pattern_names_match_any_link():
    sig = Signature([Control("A", 1, atomic=True)])
    from bigengine import close
    target = close("w", merge(make_atom(sig, "A", names=["w"]),
                              make_atom(sig, "A", names=["w"])))
    pattern = make_atom(sig, "A", names=["x"])
    assert matches_predicate(target, pattern)
    # two names may land on the same closed link
    pattern2 = merge(make_atom(sig, "A", names=["x"]), make_atom(sig, "A", names=["y"]))
    assert matches_predicate(target, pattern2)


def test_closed_pattern_edge_needs_exact_link():
    sig = Signature([Control("A", 1, atomic=True)])
    from bigengine import close
    two = close("w", merge(make_atom(sig, "A", names=["w"]),
                           make_atom(sig, "A", names=["w"])))
    three = close("w", merge(merge(make_atom(sig, "A", names=["w"]),
                                   make_atom(sig, "A", names=["w"])),
                             make_atom(sig, "A", names=["w"])))
    pattern = close("x", merge(make_atom(sig, "A", names=["x"]),
                               make_atom(sig, "A", names=["x"])))
    assert matches_predicate(two, pattern)
    assert not matches_predicate(three, pattern)


def test_errors(server_sig):
    with pytest.raises(TargetNotGround):
        find_occurrences(make_atom(server_sig, "Room"), detect_pattern(server_sig))
    with pytest.raises(PatternNotSolid):
        find_occurrences(detect_room(server_sig, 1), one(server_sig))


def test_check_constraints_param_and_ctx():
    spec = load_file(MODELS / "connect_server.big")
    rule = next(spec.rules())
    sig = spec.signature
    # room with a visitor: occurrence exists but the guard blocks it
    from bigengine import close
    emp = close("x", make_atom(sig, "Employee", names=["x"]))
    srv = close("s", nest(make_atom(sig, "Server", names=["s"]), one(sig)))
    room = nest(make_atom(sig, "Room"),
                merge(merge(emp, srv), make_atom(sig, "Visitor")))
    occs = find_occurrences(room, rule.lhs)
    assert occs
    assert all(not check_constraints(o, rule.constraints) for o in occs)
    assert check_constraints(occs[0], ()) is True
    # context-presence constraint
    room_clear = nest(make_atom(sig, "Room"), merge(emp, srv))
    state = merge(room_clear, make_atom(sig, "Visitor"))
    occs2 = find_occurrences(state, rule.lhs)
    assert occs2 and all(check_constraints(o, rule.constraints) for o in occs2)
    present_ctx = MatchConstraint("present_ctx", make_atom(sig, "Visitor"))
    absent_ctx = MatchConstraint("absent_ctx", make_atom(sig, "Visitor"))
    assert check_constraints(occs2[0], (present_ctx,))
    assert not check_constraints(occs2[0], (absent_ctx,))


def test_determinism(server_sig):
    target = merge(detect_room(server_sig, 2), detect_room(server_sig, 1))
    pattern = detect_pattern(server_sig)
    first = find_occurrences(target, pattern)
    second = find_occurrences(target, pattern)
    assert [o.node_map for o in first] == [o.node_map for o in second]
    assert [o.link_map for o in first] == [o.link_map for o in second]


def test_recomposition_soundness_random():
    sig = make_sig(DEFAULT_CONTROLS)
    rng = random.Random(99)
    checked = 0
    for _ in range(250):
        target = random_ground(rng, sig, max_nodes=8)
        pattern = random_solid_pattern(rng, sig, max_nodes=3)
        for occ in find_occurrences(target, pattern):
            assert iso_equal(recompose(occ, pattern), target)
            checked += 1
    assert checked > 50


def test_matcher_agrees_with_brute_force_small():
    sig = make_sig(DEFAULT_CONTROLS)
    rng = random.Random(123)
    for _ in range(60):
        target = random_ground(rng, sig, max_nodes=6)
        pattern = random_solid_pattern(rng, sig, max_nodes=3)
        got = matcher_images(find_occurrences(target, pattern))
        want = brute_images(target, pattern)
        assert got == want


def test_count_zero_iff_predicate_false():
    sig = make_sig(DEFAULT_CONTROLS)
    rng = random.Random(5)
    for _ in range(40):
        target = random_ground(rng, sig, max_nodes=6)
        pattern = random_solid_pattern(rng, sig, max_nodes=3)
        assert (count_occurrences(target, pattern) == 0) == \
            (not matches_predicate(target, pattern))


def test_sharing_target_matching(building_sig):
    # a pattern node can match a node that has two parents in the target
    from bigengine import share
    host = nest(make_atom(building_sig, "Room"),
                merge(make_atom(building_sig, "Camera"), make_atom(building_sig, "Camera")))
    state = share(make_atom(building_sig, "Adult"), [{0, 1}], 2, host)
    pattern = make_atom(building_sig, "Adult")
    occs = find_occurrences(state, pattern)
    assert len(occs) == 1
    assert iso_equal(recompose(occs[0], pattern), state)
    # a camera with the adult inside, extra parent goes to the context
    cam_pat = nest(make_atom(building_sig, "Camera"), make_atom(building_sig, "Adult"))
    assert find_occurrences(state, cam_pat) == []   # adult also under the other camera


def test_shared_content_routes_to_one_site(building_sig):
    # an entity under two cameras can only be absorbed by a site whose
    # parent set covers both parents
    from bigengine import share
    host = nest(make_atom(building_sig, "Room"),
                merge(make_atom(building_sig, "Camera"), make_atom(building_sig, "Camera")))
    state = share(make_atom(building_sig, "Adult"), [{0, 1}], 2, host)
    # Camera.id cannot take the adult: its other parent lies outside the match
    cam_site = make_atom(building_sig, "Camera")
    assert find_occurrences(state, cam_site) == []
    # Room.id absorbs both cameras and the shared adult in one parameter
    room_site = make_atom(building_sig, "Room")
    occs = find_occurrences(state, room_site)
    assert len(occs) == 1
    (param,) = occs[0].parameter
    adult = param.ctrl.index("Adult")
    assert len(param.node_parents[adult]) == 2
    assert iso_equal(recompose(occs[0], room_site), state)


def test_recomposition_on_corpus_states():
    from bigengine.engine import explore
    for name in ("secure_building.big", "vault.big", "fix_leave.big"):
        spec = load_file(MODELS / name)
        ts = explore(spec, 30)
        checked = 0
        for state in ts.states:
            for rule in spec.rules():
                for occ in find_occurrences(state, rule.lhs):
                    assert iso_equal(recompose(occ, rule.lhs), state)
                    checked += 1
        assert checked
