from fractions import Fraction

import pytest

from ultratree import (
    ZERO,
    Dist,
    DistanceLadder,
    FiniteUltrametricSpace,
    MalformedInputError,
    ViolationWitness,
    ball_members,
    check_ball_laws,
    diameter,
    partition_into_balls,
    uniform_value_partition,
    validate_ultrametric,
)
from ultratree.metric import PartitionError, UltrametricError

import oracles


def test_dist_order():
    assert ZERO < Dist(3) < Dist(1) < Dist(0)
    assert max(Dist(2), ZERO, Dist(1)) == Dist(1)
    assert sorted([Dist(0), ZERO, Dist(2)]) == [ZERO, Dist(2), Dist(0)]


@pytest.mark.parametrize(
    "values",
    [[], [1, 1], [Fraction(1, 2), 1], [1, 0], [1, -1]],
)
def test_ladder_rejects(values):
    with pytest.raises(MalformedInputError):
        DistanceLadder(values)


def test_ladder_heights_round_trip(ladder2):
    for d in [ZERO, *ladder2.dists()]:
        assert ladder2.from_height(ladder2.height(d)) == d
    assert ladder2.value(Dist(1)) == Fraction(1, 2)
    assert ladder2.value(ZERO) == 0


def test_valid_three_point(three_point):
    assert isinstance(three_point, FiniteUltrametricSpace)
    assert three_point.value(1, 2) == Fraction(1, 2)


def test_strong_triangle_witness(ladder2):
    # d(a,b)=1, d(a,c)=1/2, d(b,c)=1/2
    matrix = [[-1, 0, 1], [0, -1, 1], [1, 1, -1]]
    w = validate_ultrametric("abc", ladder2, matrix)
    assert w == ViolationWitness("strong-triangle", (0, 1, 2), (Dist(0), Dist(1), Dist(1)))
    assert w.reproduces(ladder2, matrix)
    assert w.describe(ladder2, "abc") == "strong-triangle: d(a,b)=1 > max(d(a,c)=1/2, d(b,c)=1/2)"


def test_zero_diagonal_witness(ladder2):
    matrix = [[-1, 0, 0], [0, -1, 1], [0, 1, -1]]
    matrix[0][0] = 0
    w = validate_ultrametric("abc", ladder2, matrix)
    assert (w.kind, w.points) == ("zero-diagonal", (0,))
    assert w.reproduces(ladder2, matrix)


def test_asymmetry_and_indiscernibles(ladder2):
    w = validate_ultrametric("ab", ladder2, [[-1, 0], [1, -1]])
    assert (w.kind, w.points) == ("asymmetry", (0, 1))
    w = validate_ultrametric("ab", ladder2, [[-1, -1], [-1, -1]])
    assert (w.kind, w.points) == ("indiscernibles", (0, 1))


@pytest.mark.parametrize(
    "labels, matrix",
    [
        ("ab", [[-1, 0]]),
        ("ab", [[-1, 0], [0]]),
        ("ab", [[-1, 5], [5, -1]]),
        ("ab", [[-1, -2], [-2, -1]]),
        ("ab", [[-1, 0.5], [0.5, -1]]),
        ("abc", [[-1, 0], [0, -1]]),
        ("aa", [[-1, 0], [0, -1]]),
        ("", []),
    ],
)
def test_malformed_input_is_distinct(ladder2, labels, matrix):
    with pytest.raises(MalformedInputError):
        validate_ultrametric(labels, ladder2, matrix)


def test_from_matrix_raises(ladder2):
    with pytest.raises(UltrametricError) as exc:
        FiniteUltrametricSpace.from_matrix("abc", ladder2, [[-1, 0, 1], [0, -1, 1], [1, 1, -1]])
    assert exc.value.witness.kind == "strong-triangle"


def test_one_point_space(ladder2):
    s = validate_ultrametric("a", ladder2, [[-1]])
    assert diameter(s, [0]) == ZERO
    assert s.resolution() == ZERO


def test_diameter(three_point):
    d = oracles.value_matrix(three_point)
    assert diameter(three_point, [0]) == ZERO
    assert diameter(three_point, [0, 1, 2]) == Dist(0)
    assert diameter(three_point, [1, 2]) == Dist(1)
    assert three_point.ladder.value(diameter(three_point, [1, 2])) == oracles.diameter(d, [1, 2])
    with pytest.raises(ValueError):
        diameter(three_point, [])


def test_ball_members(three_point):
    assert ball_members(three_point, 0, ZERO).members == {0}
    assert ball_members(three_point, 1, Dist(1)).members == {1, 2}
    assert ball_members(three_point, 0, Dist(0)).members == {0, 1, 2}


def test_ball_equality_is_by_members(three_point):
    assert ball_members(three_point, 1, Dist(1)) == ball_members(three_point, 2, Dist(1))


def test_uniform_partition(three_point, cantor2):
    assert [b.members for b in uniform_value_partition(three_point, ZERO)] == [{0}, {1}, {2}]
    assert [b.members for b in uniform_value_partition(three_point, Dist(0))] == [{0, 1, 2}]
    balls = uniform_value_partition(cantor2, Dist(1))
    assert [b.describe() for b in balls] == ["0*", "1*"]
    assert [b.members for b in balls] == [{0, 1}, {2, 3}]
    d = oracles.value_matrix(cantor2)
    assert [b.members for b in balls] == oracles.threshold_classes(d, Fraction(1, 2))


def test_partition_into_balls(cantor3):
    whole = list(cantor3.points)
    for r in [ZERO, *cantor3.ladder.dists()]:
        assert partition_into_balls(cantor3, whole, lambda x, r=r: r) == uniform_value_partition(cantor3, r)
    b = ball_members(cantor3, 4, Dist(1))
    sub = partition_into_balls(cantor3, b.members, lambda x: Dist(2))
    expected = [u for u in uniform_value_partition(cantor3, Dist(2)) if u.members <= b.members]
    assert sub == expected
    assert partition_into_balls(cantor3, [5], lambda x: ZERO)[0].members == {5}


def test_partition_into_balls_errors(cantor3):
    with pytest.raises(PartitionError) as exc:
        partition_into_balls(cantor3, [0, 1, 2], lambda x: Dist(1))
    assert exc.value.point == 0
    # point 0 takes a singleton, point 1 then asks for a ball containing it
    chooser = lambda x: ZERO if x == 0 else Dist(2)
    with pytest.raises(PartitionError) as exc:
        partition_into_balls(cantor3, range(8), chooser)
    assert exc.value.point == 1
    with pytest.raises(ValueError):
        partition_into_balls(cantor3, [], lambda x: ZERO)


def test_ball_laws_pass(three_point, cantor3):
    for s in (three_point, cantor3):
        report = check_ball_laws(s)
        assert report.ok, report.failed()
        assert report.laws["(ii) clopen"].vacuous


def test_isosceles_instance(three_point):
    # d(a,c)=1 != d(b,c)=1/2 forces d(a,b)=max=1
    assert three_point.value(0, 2) != three_point.value(1, 2)
    assert three_point.value(0, 1) == max(three_point.value(0, 2), three_point.value(1, 2))


def test_ball_laws_negative_control(ladder2):
    bad = FiniteUltrametricSpace._unchecked("abc", ladder2, [[-1, 0, 1], [0, -1, 1], [1, 1, -1]])
    report = check_ball_laws(bad)
    assert not report.ok
    assert not report.laws["(i) isosceles"].ok
    assert not report.laws["(iii) nesting"].ok


def test_ball_laws_against_oracle_nesting(cantor3):
    d = oracles.value_matrix(cantor3)
    balls = oracles.all_balls(d)
    for a in balls:
        for b in balls:
            if a & b:
                assert a <= b or b <= a


def test_describe_subset(cantor3):
    assert cantor3.describe_subset([4, 5, 6, 7]) == "1**"
    assert cantor3.describe_subset([3]) == "011"


def test_space_matrix_round_trip(three_point):
    again = validate_ultrametric(three_point.labels, three_point.ladder, three_point.matrix())
    assert again == three_point
