import pytest
from hypothesis import given, strategies as st

from indoner.corpus import ENTITY_TYPES, EntitySpan, Sentence, Token, validate_iob
from indoner.evaluation import REPORT_COLUMNS, diff, report, score


def sent(pairs):
    return Sentence([Token(w, "NNO", t) for w, t in pairs])


PROMO = ["O", "O", "O", "B-EVT", "I-EVT", "I-EVT", "O"]
PROMO_WORDS = ["Dodee", "Paidang", "memberikan", "promo", "happy", "hour", "."]


class TestScore:
    def test_identical_is_perfect(self):
        gold = [["B-PER", "I-PER", "O", "B-LOC"], ["B-IND", "O", "B-EVT", "B-FNB"]]
        s = score(gold, gold)
        for row in s.rows():
            assert (row.precision, row.recall, row.f1, row.fp, row.fn) == (1.0, 1.0, 1.0, 0, 0)
        assert s["OVERALL"].tp == 5  # one span per type

    def test_hand_counted(self):
        gold = [["B-PER", "O", "B-PER", "I-PER", "O"]]
        pred = [["B-PER", "O", "O", "O", "B-LOC"]]
        s = score(gold, pred)
        per, loc = s["PER"], s["LOC"]
        assert (per.tp, per.fp, per.fn) == (1, 0, 1)
        assert (per.precision, per.recall) == (1.0, 0.5)
        assert per.f1 == pytest.approx(2 / 3, abs=1e-15)
        assert (loc.tp, loc.fp, loc.fn, loc.f1) == (0, 1, 0, 0.0)
        o = s["OVERALL"]
        assert (o.tp, o.fp, o.fn) == (1, 1, 1)
        assert o.f1 == pytest.approx(0.5, abs=1e-15)

    def test_boundary_error_gets_no_credit(self):
        pred = ["O", "O", "O", "O", "B-EVT", "I-EVT", "O"]
        evt = score([PROMO], [pred])["EVT"]
        assert (evt.tp, evt.fp, evt.fn) == (0, 1, 1)

    def test_type_error_gets_no_credit(self):
        s = score([["B-PER", "I-PER"]], [["B-LOC", "I-LOC"]])
        assert (s["PER"].fn, s["LOC"].fp, s["OVERALL"].tp) == (1, 1, 0)

    def test_orphan_inside_opens_a_span(self):
        s = score([["B-PER", "I-PER"]], [["I-PER", "I-PER"]])
        assert s["PER"].tp == 1

    def test_no_entities_anywhere(self):
        s = score([["O", "O"]], [["O", "O"]])
        assert all(r.f1 == 0.0 and r.tp == r.fp == r.fn == 0 for r in s.rows())

    def test_sentences_accepted(self):
        g = sent(zip(PROMO_WORDS, PROMO))
        assert score([g], [g])["EVT"].tp == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="sentences"):
            score([["O"]], [])
        with pytest.raises(ValueError, match="sentence 0"):
            score([["O", "O"]], [["O"]])

    @given(st.lists(st.lists(st.sampled_from(["O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-EVT"]),
                             min_size=1, max_size=8), min_size=1, max_size=4), st.randoms())
    def test_counting_identities(self, preds, rnd):
        gold = []
        for p in preds:
            g = list(p)
            rnd.shuffle(g)
            # repair to valid IOB: an I- after a different type becomes B-
            for i, t in enumerate(g):
                if validate_iob(g[:i + 1]):
                    g[i] = "B-" + t[2:]
            gold.append(g)
        s = score(gold, preds)
        rows = list(s.per_class.values())
        for k in ("tp", "fp", "fn"):
            assert getattr(s.overall, k) == sum(getattr(r, k) for r in rows)
        for r in s.rows():
            assert 0.0 <= r.f1 <= 1.0
            assert min(r.precision, r.recall) <= r.f1 + 1e-15 <= max(r.precision, r.recall) + 2e-15


class TestReport:
    def test_rows_and_order(self):
        text = report(score([PROMO], [PROMO]))
        lines = text.splitlines()
        assert lines[0].split("\t") == list(REPORT_COLUMNS)
        assert [line.split("\t")[0] for line in lines[1:]] == [*ENTITY_TYPES, "OVERALL"]
        assert lines[4] == "EVT\t1\t0\t0\t1.0000\t1.0000\t1.0000"

    def test_four_decimals(self):
        s = score([["B-PER", "O", "B-PER", "I-PER", "O"]], [["B-PER", "O", "O", "O", "B-LOC"]])
        per = report(s).splitlines()[1].split("\t")
        assert per == ["PER", "1", "0", "1", "1.0000", "0.5000", "0.6667"]

    def test_deterministic(self):
        s = score([PROMO], [PROMO])
        assert report(s) == report(s)
        assert report(s, "text") == report(s, "text")

    def test_text_format(self):
        text = report(score([PROMO], [PROMO]), "text")
        assert text.splitlines()[0].split() == list(REPORT_COLUMNS)
        assert text.splitlines()[-1].split()[0] == "OVERALL"

    def test_empty(self):
        lines = report(score([], [])).splitlines()
        assert len(lines) == 7
        assert lines[-1] == "OVERALL\t0\t0\t0\t0.0000\t0.0000\t0.0000"

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            report(score([], []), "xml")


class TestDiff:
    def test_identical_has_no_disagreements(self):
        g = sent(zip(PROMO_WORDS, PROMO))
        assert diff([g], [g]) == []

    def test_boundary_error(self):
        g = sent(zip(PROMO_WORDS, PROMO))
        pred = ["O", "O", "O", "O", "B-EVT", "I-EVT", "O"]
        out = diff([g], [pred])
        assert [(d.side, d.span, d.text) for d in out] == [
            ("gold", EntitySpan(3, 6, "EVT"), "promo happy hour"),
            ("pred", EntitySpan(4, 6, "EVT"), "happy hour"),
        ]

    def test_post_instagram(self):
        words = ["akun", "@henjiwong", "di", "post", "Instagram"]
        g = sent(zip(words, ["O", "O", "O", "B-IND", "I-IND"]))
        out = diff([g], [["O", "O", "O", "O", "B-IND"]])
        assert {(d.side, d.text) for d in out} == {("gold", "post Instagram"), ("pred", "Instagram")}
        assert all(d.sentence == 0 for d in out)

    def test_length_mismatch(self):
        g = sent(zip(PROMO_WORDS, PROMO))
        with pytest.raises(ValueError):
            diff([g], [PROMO[:-1]])
