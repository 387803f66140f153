import io
import random
from datetime import datetime

import pytest

from riskmap.homes import (
    HomeAssignment,
    NightWindowConfig,
    detect_homes,
    is_weekday_night,
    read_homes,
    write_homes,
)

from conftest import rec


def at(ts):
    return datetime.fromisoformat(ts + "-03:00")


class TestNightWindow:
    # calendar anchors: 2011-11-07 was a Monday
    def test_tuesday_evening_is_night(self):
        assert is_weekday_night(at("2011-11-08T21:30:00"))

    def test_friday_early_morning_is_tail_of_thursday(self):
        assert is_weekday_night(at("2011-11-11T05:59:59"))

    def test_saturday_evening_is_not_night(self):
        assert not is_weekday_night(at("2011-11-12T22:00:00"))

    def test_friday_evening_is_not_night(self):
        assert not is_weekday_night(at("2011-11-11T20:00:00"))

    def test_start_boundary_inclusive_end_exclusive(self):
        assert is_weekday_night(at("2011-11-07T20:00:00"))  # Monday 20:00
        assert not is_weekday_night(at("2011-11-07T06:00:00"))  # Monday 06:00
        assert not is_weekday_night(at("2011-11-07T19:59:59"))
        assert is_weekday_night(at("2011-11-08T05:59:59"))  # tail of Monday

    def test_monday_early_morning_follows_sunday(self):
        assert not is_weekday_night(at("2011-11-07T03:00:00"))

    def test_custom_window(self):
        cfg = NightWindowConfig(start_hour=22, end_hour=4, night_days=frozenset({4, 5}))
        assert is_weekday_night(at("2011-11-11T23:00:00"), cfg)  # Friday
        assert is_weekday_night(at("2011-11-12T03:59:59"), cfg)  # tail of Friday
        assert not is_weekday_night(at("2011-11-12T04:00:00"), cfg)
        assert not is_weekday_night(at("2011-11-08T23:00:00"), cfg)  # Tuesday

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NightWindowConfig(start_hour=24, end_hour=6)
        with pytest.raises(ValueError):
            NightWindowConfig(night_days=frozenset())
        with pytest.raises(ValueError):
            NightWindowConfig(night_days=frozenset({9}))

    def test_from_day_names(self):
        cfg = NightWindowConfig.from_day_names(20, 6, ["Mon", "tuesday", "WED", "thu"])
        assert cfg.night_days == frozenset({0, 1, 2, 3})


def night_call(user, antenna, day=7, hour=21, minute=0, role="caller"):
    ts = f"2011-11-{day:02d}T{hour:02d}:{minute:02d}:00-03:00"
    if role == "caller":
        return rec(user, "peer", ts, "out", antenna)
    return rec("peer", user, ts, "in", antenna)


class TestDetectHomes:
    def test_strict_majority(self):
        records = [
            night_call("u", "A1", minute=0),
            night_call("u", "A1", minute=1),
            night_call("u", "A1", minute=2),
            night_call("u", "A2", minute=3),
        ]
        homes = detect_homes(records, {"u"})
        assert homes["u"] == HomeAssignment("u", "A1", 3, 4)

    def test_tie_breaks_to_smallest_antenna_id(self):
        records = [
            night_call("u", "A2", minute=0),
            night_call("u", "A2", minute=1),
            night_call("u", "A1", minute=2),
            night_call("u", "A1", minute=3),
        ]
        homes = detect_homes(records, {"u"})
        assert homes["u"].home_antenna == "A1"

    def test_zero_night_calls_means_no_assignment(self):
        day_record = rec("u", "peer", "2011-11-07T12:00:00-03:00", "out", "A1")
        assert detect_homes([day_record], {"u"}) == {}

    def test_only_localized_party_contributes(self):
        # outgoing record locates the caller, incoming locates the callee
        records = [
            rec("alice", "bob", "2011-11-07T21:00:00-03:00", "out", "A_alice"),
            rec("alice", "bob", "2011-11-07T21:00:00-03:00", "in", "A_bob"),
        ]
        homes = detect_homes(records, {"alice", "bob"})
        assert homes["alice"].home_antenna == "A_alice"
        assert homes["bob"].home_antenna == "A_bob"

    def test_nonclients_get_no_assignment(self):
        records = [night_call("u", "A1")]
        assert detect_homes(records, {"someone_else"}) == {}

    def test_single_antenna_degenerate_case(self):
        records = [night_call("u", "A9", minute=m) for m in range(5)]
        homes = detect_homes(records, {"u"})
        assert homes["u"] == HomeAssignment("u", "A9", 5, 5)

    def test_assignment_is_argmax_and_window_consistent(self):
        # build a random scenario, then recount independently
        rnd = random.Random(31)
        records = []
        users = [f"u{i}" for i in range(25)]
        for i in range(1500):
            user = rnd.choice(users)
            day = 1 + rnd.randrange(28)
            hour = rnd.randrange(24)
            antenna = f"A{rnd.randrange(6)}"
            ts = f"2011-11-{day:02d}T{hour:02d}:00:00-03:00"
            if rnd.random() < 0.5:
                records.append(rec(user, "peer", ts, "out", antenna))
            else:
                records.append(rec("peer", user, ts, "in", antenna))
        cfg = NightWindowConfig()
        homes = detect_homes(records, set(users), cfg)

        recount = {}
        for r in records:
            if not is_weekday_night(r.timestamp, cfg):
                continue
            user = r.localized_user()
            if user in users:
                recount.setdefault(user, {}).setdefault(r.antenna_id, 0)
                recount[user][r.antenna_id] += 1
        assert set(homes) == set(recount)
        for user, h in homes.items():
            hist = recount[user]
            assert hist[h.home_antenna] == max(hist.values())
            assert h.night_calls_at_home == hist[h.home_antenna]
            assert h.night_calls_total == sum(hist.values())
            ties = [a for a, n in hist.items() if n == max(hist.values())]
            assert h.home_antenna == min(ties)

    def test_order_and_partition_invariance(self):
        rnd = random.Random(65)
        records = []
        for i in range(400):
            user = f"u{rnd.randrange(10)}"
            records.append(
                night_call(user, f"A{rnd.randrange(4)}", day=1 + rnd.randrange(27), minute=i % 60)
            )
        clients = {f"u{i}" for i in range(10)}
        base = detect_homes(records, clients)

        shuffled = records[:]
        rnd.shuffle(shuffled)
        assert detect_homes(shuffled, clients) == base

        from riskmap.homes import assignments_from_histograms, merge_histograms, night_histograms

        cfg = NightWindowConfig()
        merged: dict = {}
        for part in (records[250:], records[:250]):
            merge_histograms(merged, night_histograms(part, frozenset(clients), cfg))
        assert assignments_from_histograms(merged) == base


class TestHomesIO:
    def test_round_trip_sorted_by_user(self, tmp_path):
        homes = {
            "zed": HomeAssignment("zed", "A2", 4, 6),
            "abe": HomeAssignment("abe", "A1", 2, 2),
        }
        buf = io.StringIO()
        write_homes(homes, buf)
        assert buf.getvalue() == "abe,A1,2,2\nzed,A2,4,6\n"
        assert read_homes(io.StringIO(buf.getvalue())) == homes
