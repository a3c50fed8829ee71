import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from attrilens.data import CategoryCodebook, DataError
from attrilens.explain import BackgroundSet, ShapExplanation, make_explainer
from attrilens.models import Hyperparams, fit
from attrilens.narrate import (
    CLOSING_INSTRUCTION,
    CompletionEndpoint,
    PolicyRules,
    Prompt,
    build_prompt,
    complete,
    load_lexicon,
    template_narrative,
    what_if,
)
from conftest import toy_table


def make_expl(phi, names=None):
    phi = np.asarray(phi, dtype=float)
    names = names or [f"f{j}" for j in range(len(phi))]
    base = 0.1
    return ShapExplanation(phi, base, base + float(phi.sum()), "margin", np.zeros(len(phi)), names)


class TestPrompt:
    def test_line_format(self):
        p = build_prompt(make_expl([0.5, -0.251], ["OverTime", "Age"]))
        lines = p.text.splitlines()
        assert lines[0] == "The SHAP value for feature 'OverTime' is 0.50."
        assert lines[1] == "The SHAP value for feature 'Age' is -0.25."
        assert lines[-1] == CLOSING_INSTRUCTION

    def test_rules_header(self):
        rules = PolicyRules(["No salary negotiation in Q4.", "Stock grants need VP sign-off."])
        p = build_prompt(make_expl([0.1]), rules)
        lines = p.text.splitlines()
        assert lines[0] == "Company rules:"
        assert lines[1] == "- No salary negotiation in Q4."
        assert lines[2] == "- Stock grants need VP sign-off."

    def test_no_rules_no_header(self):
        p = build_prompt(make_expl([0.1]), PolicyRules())
        assert "Company rules" not in p.text


class TestLexicon:
    def test_packaged_lexicon_loads(self):
        lex = load_lexicon()
        assert "OverTime" in lex and "MonthlyIncome" in lex
        for action in lex.values():
            assert action

    def test_custom_path_and_comments(self, tmp_path):
        p = tmp_path / "lex.tsv"
        p.write_text("# comment\nOverTime\tReduce overtime.\n\nAge\tIgnore.\n")
        lex = load_lexicon(p)
        assert lex == {"OverTime": "Reduce overtime.", "Age": "Ignore."}


class TestTemplate:
    def test_directions(self):
        n = template_narrative(make_expl([0.8, -0.4], ["OverTime", "StockOptionLevel"]))
        assert "pushes toward leaving" in n.reasons[0]
        assert n.reasons[0].startswith("OverTime")
        assert "supports staying" in n.reasons[1]
        assert n.source == "template"

    def test_top_k_and_magnitude_order(self):
        expl = make_expl([0.1, -0.9, 0.5], ["a", "b", "c"])
        n = template_narrative(expl, top_k=2)
        assert len(n.reasons) == 2
        assert n.reasons[0].startswith("b") and n.reasons[1].startswith("c")

    def test_suggestions_only_for_risk_factors(self):
        lex = {"x": "Do x things."}
        n = template_narrative(make_expl([0.7, -0.7], ["x", "y"]), lexicon=lex)
        assert n.suggestions == ["Do x things."]

    def test_all_protective_gets_default_suggestion(self):
        n = template_narrative(make_expl([-0.5, -0.2], ["a", "b"]), lexicon={})
        assert len(n.suggestions) == 1
        assert "maintain" in n.suggestions[0].lower()

    def test_all_zero(self):
        n = template_narrative(make_expl([0.0, 0.0]))
        assert n.reasons == ["No dominant factors: all feature contributions are zero."]
        assert n.suggestions == []

    def test_bad_top_k(self):
        with pytest.raises(DataError):
            template_narrative(make_expl([0.1]), top_k=0)

    def test_unknown_feature_fallback_action(self):
        n = template_narrative(make_expl([0.9], ["Mystery"]), lexicon={})
        assert "Mystery" in n.suggestions[0]


class _Handler(BaseHTTPRequestHandler):
    responses = []
    seen = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        _Handler.seen.append((dict(self.headers), body))
        status, payload = _Handler.responses.pop(0)
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def mock_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Handler.responses = []
    _Handler.seen = []
    yield f"http://127.0.0.1:{server.server_port}/v1/complete"
    server.shutdown()


class TestComplete:
    def test_external_bullets_split(self, mock_server):
        _Handler.responses = [(200, {"completion": "- too much overtime\n- low pay\n- cut overtime\n- raise salary"})]
        n = complete(Prompt("p"), CompletionEndpoint(mock_server))
        assert n.source == "external"
        assert n.reasons == ["too much overtime", "low pay"]
        assert n.suggestions == ["cut overtime", "raise salary"]

    def test_request_body_and_auth_header(self, mock_server, monkeypatch):
        monkeypatch.setenv("ATTRILENS_COMPLETION_TOKEN", "sekrit")
        _Handler.responses = [(200, {"completion": "- a\n- b"})]
        complete(Prompt("the prompt"), CompletionEndpoint(mock_server, model="m1"))
        headers, body = _Handler.seen[0]
        assert body == {"model": "m1", "prompt": "the prompt"}
        assert headers.get("Authorization") == "Bearer sekrit"

    def test_no_token_no_auth_header(self, mock_server, monkeypatch):
        monkeypatch.delenv("ATTRILENS_COMPLETION_TOKEN", raising=False)
        _Handler.responses = [(200, {"completion": "- a"})]
        complete(Prompt("p"), CompletionEndpoint(mock_server))
        headers, _ = _Handler.seen[0]
        assert "Authorization" not in headers

    def test_http_error_falls_back(self, mock_server):
        _Handler.responses = [(500, {"error": "boom"})]
        n = complete(Prompt("p"), CompletionEndpoint(mock_server), fallback_expl=make_expl([0.9], ["x"]))
        assert n.source == "template"
        assert n.reasons and n.reasons[0].startswith("x")

    def test_bulletless_body_falls_back(self, mock_server):
        _Handler.responses = [(200, {"completion": "plain prose, no bullets"})]
        n = complete(Prompt("p"), CompletionEndpoint(mock_server), fallback_expl=make_expl([0.3]))
        assert n.source == "template"

    def test_unreachable_endpoint_falls_back(self):
        ep = CompletionEndpoint("http://127.0.0.1:1/nope", timeout=0.2)
        n = complete(Prompt("p"), ep, fallback_expl=make_expl([0.3]))
        assert n.source == "template"

    def test_missing_endpoint(self):
        n = complete(Prompt("p"), None, fallback_expl=make_expl([-0.2]))
        assert n.source == "template" and n.reasons


@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(80, 3))
    y = (X[:, 0] > 0).astype(int)
    table = toy_table(X, y)
    model = fit("LogisticRegression", table, Hyperparams(seed=0))
    bg = BackgroundSet(table.features[:10])
    return model, table, make_explainer(model, bg)


class TestWhatIf:
    def test_edit_moves_probability(self, trained):
        model, table, explainer = trained
        x = table.features[0]
        res = what_if(model, x, [("f0", x[0] - 5.0)], explainer)
        assert res.new_proba < res.original_proba
        assert res.edits == [("f0", float(x[0]), float(x[0] - 5.0))]

    def test_no_edits_identity(self, trained):
        model, table, explainer = trained
        res = what_if(model, table.features[1], [], explainer)
        assert res.new_proba == res.original_proba and res.edits == []

    def test_unknown_feature(self, trained):
        model, table, explainer = trained
        with pytest.raises(DataError, match="unknown feature"):
            what_if(model, table.features[0], [("nope", 1.0)], explainer)

    def test_categorical_text_encoded(self, trained):
        model, table, explainer = trained
        cb = CategoryCodebook({"f2": ["No", "Yes"]})
        x = table.features[0].copy()
        x[2] = 1.0
        res = what_if(model, x, [("f2", "No")], explainer, codebook=cb)
        assert res.edits == [("f2", 1.0, 0.0)]

    def test_categorical_code_range_checked(self, trained):
        model, table, explainer = trained
        cb = CategoryCodebook({"f2": ["No", "Yes"]})
        with pytest.raises(DataError, match="out of range"):
            what_if(model, table.features[0], [("f2", 5)], explainer, codebook=cb)

    def test_weights_applied_before_prediction(self, trained):
        model, table, explainer = trained
        x = table.features[0]
        res_w = what_if(model, x, [], explainer, weights={"f0": 2.0})
        xw = x.copy()
        xw[0] *= 2.0
        assert res_w.original_proba == pytest.approx(float(model.predict_proba(xw)[0]))

    def test_explanation_is_for_edited_instance(self, trained):
        model, table, explainer = trained
        x = table.features[2]
        res = what_if(model, x, [("f1", 9.0)], explainer)
        assert res.new_explanation.feature_values[1] == 9.0
