"""Python smoke tests for the extension module."""

import math

import pytest

import moslim


def test_parse_serialize_round_trip():
    tp = moslim.parse_prefix("<helpfulness 5> Summarize this.", scheme=4)
    assert tp.spec == {"helpfulness": 5}
    assert tp.body == "Summarize this."
    assert moslim.serialize_prefix(tp.spec, tp.body) == "<helpfulness 5> Summarize this."

    text = "<honesty 1><harmless 2> long prompt body"
    back = moslim.parse_prefix(text, scheme=4)
    assert back.spec == {"honesty": 1, "harmless": 2}
    assert moslim.strip_tags(text) == "long prompt body"
    assert moslim.strip_tags("no tags here") == "no tags here"


def test_parse_errors():
    with pytest.raises(moslim.MoslimError):
        moslim.parse_prefix("<wisdom 3> Q", scheme=4)
    with pytest.raises(moslim.MoslimError):
        moslim.parse_prefix("<helpfulness 9> Q", scheme=4)


def test_oracle_score_counts_tokens():
    vocab = moslim.Vocabulary.standard()
    response = [vocab.help] * 4 + [vocab.harm] + [5, 6]
    score = moslim.oracle_score(response)
    assert score == {"helpfulness": 5, "honesty": 1, "harmless": 1}


def test_raw_to_intensity_bucketing():
    assert moslim.map_raw_to_intensity(5, "helpfulness", 4) == 5
    assert moslim.map_raw_to_intensity(3, "helpfulness", 2) == 1
    assert moslim.map_raw_to_intensity(4, "helpfulness", 2) == 2


def test_datasets_and_rm_training():
    ds = moslim.build_rm_dataset(800, scheme=2, seed=1)
    assert len(ds) == 800
    assert len(ds.samples[0].label) == 6

    model, _ = moslim.train_rm(ds, epochs=4, seed=2)
    held = moslim.build_rm_dataset(400, scheme=2, seed=3)
    preference_acc, intensity_acc = model.evaluate(held)
    assert intensity_acc > 0.6
    assert preference_acc > 0.6

    # A fresh uniform model on a fully-labeled DT2 batch loses 3 ln 2; here we
    # just sanity-check the calibrated mapping output is finite and ordered.
    stats = moslim.calibrate_stats(model, ds)
    dist = model.forward(ds.samples[0].question, ds.samples[0].answer)
    reward = moslim.map_reward(dist, {"helpfulness": 1}, stats)
    assert math.isfinite(reward)


def test_map_reward_hand_case_monotonicity():
    ds = moslim.build_rm_dataset(500, scheme=4, seed=5)
    model, stats = moslim.train_rm(ds, epochs=2, seed=6)
    dist = model.forward(ds.samples[0].question, ds.samples[0].answer)
    lo = moslim.map_reward(dist, {"harmless": 1}, stats)
    hi = moslim.map_reward(dist, {"harmless": 1, "helpfulness": 1}, stats)
    assert math.isfinite(lo) and math.isfinite(hi)
    with pytest.raises(moslim.MoslimError):
        moslim.map_reward(dist, {}, stats)


def test_policy_sampling_and_merge():
    policy = moslim.Policy(scheme=4, seed=7)
    tp = moslim.parse_prefix("<helpfulness 3> 4 5 6", scheme=4)
    a = policy.sample(tp, max_len=12, seed=1)
    b = policy.sample(tp, max_len=12, seed=1)
    assert a.response == b.response
    assert a.logprobs == pytest.approx(policy.logprob(tp, a.response))

    # Fresh policies are uniform.
    vocab = moslim.Vocabulary.standard()
    lp = policy.logprob(tp, [1, 2, 3])
    assert lp == pytest.approx([-math.log(len(vocab))] * 3)

    other = moslim.Policy(scheme=4, seed=8)
    merged = moslim.merge_policies([policy, other], [1.0, 0.0])
    assert merged.params() == policy.params()

    adv = moslim.rloo_advantages([1.0, 0.0])
    assert adv == [1.0, -1.0]


def test_short_training_run_improves_reward():
    prompts = moslim.build_rl_dataset(64, scheme=2, seed=11)
    ds = moslim.build_rm_dataset(2000, scheme=2, seed=12)
    model, _ = moslim.train_rm(ds, epochs=3, seed=13)
    stats = moslim.calibrate_stats(model, ds)
    policy, metrics = moslim.train_policy(
        "ppo", prompts, model, stats, steps=120, batch_size=16, seed=14
    )
    assert len(metrics) == 12
    assert metrics[-1]["mean_reward"] > metrics[0]["mean_reward"]

    rows = moslim.intensity_sweep(policy, "helpfulness", scheme=2, n_samples=150, seed=15)
    assert [row["n"] for row in rows] == [1, 2]


def test_checkpoint_round_trip(tmp_path):
    policy = moslim.Policy(scheme=4, seed=9)
    path = str(tmp_path / "policy.ckpt")
    policy.save(path)
    back = moslim.Policy.load(path)
    assert back.params() == policy.params()
