import requests

from model_server.data import read_pairs
from model_server.train import greedy_predict
from model_server.checkpoint import load_checkpoint


def test_health(served_model):
    assert requests.get(f"{served_model}/health", timeout=10).status_code == 200


def test_tokenize_pad_lexeme_is_one_id(served_model):
    response = requests.post(f"{served_model}/tokenize",
                             json={"text": "<pad>"}, timeout=10)
    assert response.status_code == 200
    assert len(response.json()["ids"]) == 1


def test_tokenize_separators_atomic(served_model):
    for lexeme in ("<q>", "<pos>", "<dep>", "<dpt>", "<ent>"):
        response = requests.post(f"{served_model}/tokenize",
                                 json={"text": lexeme}, timeout=10)
        assert len(response.json()["ids"]) == 1


def test_detokenize_round_trip(served_model):
    ids = requests.post(f"{served_model}/tokenize",
                        json={"text": "<q> Who is"}, timeout=10).json()["ids"]
    text = requests.post(f"{served_model}/detokenize",
                         json={"ids": ids}, timeout=10).json()["text"]
    assert text == "<q> Who is"


def test_generate_matches_local_decoding(served_model, trained_checkpoint,
                                         toy_paths):
    model, tokenizer = load_checkpoint(str(trained_checkpoint))
    pairs = read_pairs(toy_paths["train"])[:5]
    local = greedy_predict(model, tokenizer, [p.input for p in pairs])
    for pair, expected in zip(pairs, local):
        response = requests.post(
            f"{served_model}/generate",
            json={"input": pair.input, "max_new_tokens": 64, "params": {}},
            timeout=60,
        )
        assert response.status_code == 200
        assert response.json()["output"] == expected


def test_generate_reproduces_training_targets(served_model, toy_paths):
    pairs = read_pairs(toy_paths["train"])[:40]
    hits = 0
    for pair in pairs:
        response = requests.post(
            f"{served_model}/generate",
            json={"input": pair.input, "max_new_tokens": 64, "params": {}},
            timeout=60,
        )
        if response.json()["output"] == " ".join(pair.target.split()):
            hits += 1
    assert hits / len(pairs) >= 0.9  # overfit toy model memorizes its data


def test_generate_is_deterministic(served_model, toy_paths):
    pair = read_pairs(toy_paths["train"])[0]
    payload = {"input": pair.input, "max_new_tokens": 64, "params": {}}
    first = requests.post(f"{served_model}/generate", json=payload,
                          timeout=60).json()["output"]
    second = requests.post(f"{served_model}/generate", json=payload,
                           timeout=60).json()["output"]
    assert first == second


def test_malformed_body_is_400(served_model):
    response = requests.post(f"{served_model}/generate",
                             json={"wrong": "shape"}, timeout=10)
    assert response.status_code == 400
