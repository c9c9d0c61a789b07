"""Variant assembly, training behavior, metrics, and checkpoints."""

import numpy as np
import pytest
import scipy.stats

from animepop.corpus import Corpus
from animepop.errors import (
    CheckpointFormatError,
    DataError,
    EmptyTestSetError,
    MissingFeatureError,
    SpecHashMismatchError,
    UndefinedCorrelationError,
)
from animepop.nn import LinearSpec, mse_loss
from animepop.pipeline import (
    LearningCurve,
    ModelVariant,
    TrainConfig,
    build_model,
    deep_features,
    default_epochs,
    evaluate,
    interpret_correlation,
    kendall_tau,
    load_checkpoint,
    pearson,
    predict,
    save_checkpoint,
    scale_labels,
    spearman,
    traditional_features,
    train,
    write_learning_curve,
    write_run_manifest,
)
from animepop.scoring import ScaleParams
from animepop.splitter import Split

from conftest import make_anime, make_character


def toy_split(train_ids, test_ids, seed=42):
    return Split(
        train=frozenset(train_ids),
        test=frozenset(test_ids),
        seed=seed,
        target_train_fraction=0.815,
    )


def random_features(ids, variant, seed=0):
    rng = np.random.default_rng(seed)
    feats = {}
    for i in ids:
        if variant is ModelVariant.FULL:
            feats[i] = (
                rng.standard_normal(768),
                rng.standard_normal(768),
                rng.standard_normal(49),
            )
        elif variant is ModelVariant.PORTRAIT_ONLY:
            feats[i] = rng.standard_normal(49)
        elif variant is ModelVariant.TRADITIONAL:
            feats[i] = rng.standard_normal(2250)
        else:
            feats[i] = rng.standard_normal(768)
    return feats


def random_labels(ids, seed=1):
    rng = np.random.default_rng(seed)
    return {i: float(rng.uniform(0, 1)) for i in ids}


class TestArchitectures:
    def test_full_shapes(self):
        model = build_model(ModelVariant.FULL, seed=0)
        assert model.input_dims == (768, 768, 49)
        rng = np.random.default_rng(0)
        out = model.forward(
            (rng.standard_normal((2, 768)), rng.standard_normal((2, 768)),
             rng.standard_normal((2, 49)))
        )
        assert out.shape == (2, 1)
        assert np.all((out > 0) & (out < 1))

    def test_full_parameter_count(self):
        model = build_model(ModelVariant.FULL, seed=0)
        branch = (817 * 768 + 768) + (768 * 768 + 768)
        head = (
            (1536 * 768 + 768) + (768 * 384 + 384) + (384 * 192 + 192)
            + (192 * 96 + 96) + (96 * 48 + 48) + (48 * 24 + 24) + (24 * 12 + 12)
            + (12 * 6 + 6) + (6 * 3 + 3) + (3 * 1 + 1)
        )
        assert sum(p.size for p in model.parameters()) == branch + head

    def test_single_branch_first_layer(self):
        model = build_model(ModelVariant.SYNOPSIS_ONLY, seed=0)
        first = model.head.spec.layers[0]
        assert isinstance(first, LinearSpec)
        assert (first.in_dim, first.out_dim) == (768, 768)
        assert len(model.head.layers) == 10  # no leading dropout, ten linears

    def test_char_desc_only_same_shape_as_synopsis_only(self):
        a = build_model(ModelVariant.SYNOPSIS_ONLY, seed=0)
        b = build_model(ModelVariant.CHAR_DESC_ONLY, seed=0)
        assert [l.weight.shape for l in a.head.layers] == [l.weight.shape for l in b.head.layers]

    def test_portrait_only_structure(self):
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=0)
        shapes = [l.weight.shape for l in model.head.layers]
        assert shapes == [(768, 49), (768, 768), (384, 768), (1, 384)]
        acts = [l.activation for l in model.head.layers]
        assert acts == ["tanh", "tanh", "relu", "sigmoid"]
        out = model.forward((np.random.default_rng(0).standard_normal((3, 49)),))
        assert out.shape == (3, 1)

    def test_traditional_first_layer(self):
        model = build_model(ModelVariant.TRADITIONAL, seed=0)
        assert model.head.layers[0].weight.shape == (1000, 2250)
        assert [l.weight.shape for l in model.head.layers] == [
            (1000, 2250), (500, 1000), (250, 500), (100, 250), (1, 100)
        ]

    def test_default_epochs(self):
        assert default_epochs(ModelVariant.TRADITIONAL) == 30
        for v in (ModelVariant.FULL, ModelVariant.SYNOPSIS_ONLY,
                  ModelVariant.CHAR_DESC_ONLY, ModelVariant.PORTRAIT_ONLY):
            assert default_epochs(v) == 5

    def test_full_backward_splits_input_gradients(self):
        model = build_model(ModelVariant.FULL, seed=1)
        rng = np.random.default_rng(2)
        inputs = (
            rng.standard_normal((2, 768)),
            rng.standard_normal((2, 768)),
            rng.standard_normal((2, 49)),
        )
        out = model.forward(inputs)
        g_syn, g_char, g_por = model.backward(np.ones_like(out))
        assert g_syn.shape == (2, 768)
        assert g_char.shape == (2, 768)
        assert g_por.shape == (2, 49)


class TestTraining:
    def test_curve_lengths_and_determinism(self):
        ids = list(range(24))
        split = toy_split(ids[:20], ids[20:])
        feats = random_features(ids, ModelVariant.SYNOPSIS_ONLY)
        labels = random_labels(ids)
        config = TrainConfig(epochs=3, batch_size=8)

        model1 = build_model(ModelVariant.SYNOPSIS_ONLY, seed=42)
        _, curve1 = train(model1, split, feats, labels, config)
        model2 = build_model(ModelVariant.SYNOPSIS_ONLY, seed=42)
        _, curve2 = train(model2, split, feats, labels, config)
        assert curve1.epochs == 3
        assert curve1 == curve2  # bit-for-bit
        for p1, p2 in zip(model1.parameters(), model2.parameters()):
            assert np.array_equal(p1, p2)

    def test_zero_epochs_is_identity(self):
        ids = list(range(12))
        split = toy_split(ids[:10], ids[10:])
        feats = random_features(ids, ModelVariant.PORTRAIT_ONLY)
        labels = random_labels(ids)
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=7)
        before = [p.copy() for p in model.parameters()]
        _, curve = train(model, split, feats, labels, TrainConfig(epochs=0))
        assert curve.epochs == 0
        for p, b in zip(model.parameters(), before):
            assert np.array_equal(p, b)

    def test_missing_feature_raises(self):
        ids = list(range(6))
        split = toy_split(ids[:5], ids[5:])
        feats = random_features(ids[:-1], ModelVariant.SYNOPSIS_ONLY)
        labels = random_labels(ids)
        model = build_model(ModelVariant.SYNOPSIS_ONLY, seed=0)
        with pytest.raises(MissingFeatureError, match="5"):
            train(model, split, feats, labels, TrainConfig(epochs=1))

    def test_missing_label_raises(self):
        ids = list(range(6))
        split = toy_split(ids[:5], ids[5:])
        feats = random_features(ids, ModelVariant.SYNOPSIS_ONLY)
        labels = random_labels(ids[:-1])
        model = build_model(ModelVariant.SYNOPSIS_ONLY, seed=0)
        with pytest.raises(MissingFeatureError, match="label"):
            train(model, split, feats, labels, TrainConfig(epochs=1))

    def test_loss_decreases_on_easy_problem(self):
        ids = list(range(32))
        split = toy_split(ids[:28], ids[28:])
        feats = random_features(ids, ModelVariant.SYNOPSIS_ONLY, seed=3)
        labels = random_labels(ids, seed=4)
        model = build_model(ModelVariant.SYNOPSIS_ONLY, seed=42)
        _, curve = train(model, split, feats, labels,
                         TrainConfig(epochs=12, learning_rate=1e-3))
        assert curve.train_loss[-1] < curve.train_loss[0]

    def test_predict_range_and_zeroed_head(self):
        model = build_model(ModelVariant.SYNOPSIS_ONLY, seed=0)
        x = np.random.default_rng(1).standard_normal(768)
        y = predict(model, x)
        assert 0.0 < y < 1.0
        model.head.layers[-1].weight[...] = 0.0
        model.head.layers[-1].bias[...] = 0.0
        assert predict(model, x) == 0.5

    def test_curve_file_precision(self, tmp_path):
        curve = LearningCurve((1 / 3, 0.1), (2 / 3, 0.2))
        path = tmp_path / "curve.csv"
        write_learning_curve(curve, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,test_loss"
        _, t, v = lines[1].split(",")
        assert float(t) == 1 / 3  # round-trips the exact float64
        assert float(v) == 2 / 3
        mantissa = t.split("e")[0].replace(".", "").lstrip("-")
        assert len(mantissa) >= 12


class TestMetrics:
    def test_pearson_perfect(self):
        x = np.arange(10.0)
        assert pearson(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-15)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-15)

    def test_pearson_matches_direct_formula(self):
        x = np.array([1.0, 2.0, 3.0, 5.0])
        y = np.array([2.0, 1.0, 4.0, 5.0])
        dx = x - x.mean()
        dy = y - y.mean()
        want = (dx * dy).sum() / np.sqrt((dx**2).sum() * (dy**2).sum())
        assert pearson(x, y) == pytest.approx(want, abs=1e-9)

    def test_spearman_monotone(self):
        x = np.array([1.0, 2.0, 7.0, 9.0])
        assert spearman(x, np.exp(x)) == pytest.approx(1.0, abs=1e-15)
        assert spearman(x, -(x**3)) == pytest.approx(-1.0, abs=1e-15)

    def test_spearman_tie_example(self):
        x = [1.0, 2.0, 2.0, 4.0]
        y = [1.0, 3.0, 2.0, 4.0]
        rx = np.array([1.0, 2.5, 2.5, 4.0])
        ry = np.array([1.0, 3.0, 2.0, 4.0])
        assert spearman(x, y) == pytest.approx(pearson(rx, ry), abs=1e-15)

    def test_kendall_perfect(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert kendall_tau(x, x) == 1.0
        assert kendall_tau(x, x[::-1]) == -1.0

    def test_kendall_worked_example_exact(self):
        assert kendall_tau((1, 2, 3, 4), (1, 3, 2, 4)) == 2 / 3

    def test_kendall_tie_correction(self):
        x = [1.0, 1.0, 2.0, 3.0]
        y = [1.0, 2.0, 3.0, 4.0]
        ref = scipy.stats.kendalltau(x, y, variant="b").statistic
        assert kendall_tau(x, y) == pytest.approx(ref, abs=1e-12)

    def test_metrics_match_library_oracles(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            n = int(rng.integers(3, 40))
            x = rng.integers(0, 6, size=n).astype(float)  # ties likely
            y = x + rng.standard_normal(n)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            assert pearson(x, y) == pytest.approx(
                scipy.stats.pearsonr(x, y).statistic, abs=1e-9)
            assert spearman(x, y) == pytest.approx(
                scipy.stats.spearmanr(x, y).statistic, abs=1e-9)
            assert kendall_tau(x, y) == pytest.approx(
                scipy.stats.kendalltau(x, y, variant="b").statistic, abs=1e-9)

    def test_symmetry_and_invariances(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(25)
        y = rng.standard_normal(25)
        for f in (pearson, spearman, kendall_tau):
            assert f(x, y) == pytest.approx(f(y, x), abs=1e-12)
        # positive affine maps change neither pearson nor spearman
        assert pearson(3 * x + 2, y) == pytest.approx(pearson(x, y), abs=1e-9)
        assert spearman(3 * x + 2, y) == pytest.approx(spearman(x, y), abs=1e-9)
        # strictly monotone maps change neither spearman nor kendall
        assert spearman(np.exp(x), y) == pytest.approx(spearman(x, y), abs=1e-9)
        assert kendall_tau(np.exp(x), y) == pytest.approx(kendall_tau(x, y), abs=1e-12)

    def test_constant_input_undefined(self):
        const = [2.0, 2.0, 2.0]
        vary = [1.0, 2.0, 3.0]
        for f in (pearson, spearman, kendall_tau):
            with pytest.raises(UndefinedCorrelationError):
                f(const, vary)
            with pytest.raises(UndefinedCorrelationError):
                f(vary, const)

    def test_constant_input_whose_mean_rounds_away(self):
        # mean(14 copies of x) can differ from x by an ulp; the constancy
        # check must not mistake that rounding residue for variance.
        x = np.full(14, 0.5379579412345678)
        assert x.mean() != x[0]
        with pytest.raises(UndefinedCorrelationError):
            pearson(x, np.arange(14.0))

    def test_length_checks(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0], [2.0])

    def test_interpretation_bands(self):
        assert interpret_correlation(0.431) == "moderate"
        assert interpret_correlation(0.096) == "very weak"
        assert interpret_correlation(-0.55) == "strong"
        assert interpret_correlation(0.20) == "weak"
        assert interpret_correlation(0.30) == "moderate"
        assert interpret_correlation(0.50) == "strong"
        with pytest.raises(ValueError):
            interpret_correlation(1.5)


class _StubModel:
    """Duck-typed stand-in whose forward returns canned scaled outputs."""

    def __init__(self, outputs_by_row):
        self.n_inputs = 1
        self._outputs = outputs_by_row

    def forward(self, inputs, training=False, rng=None):
        n = inputs[0].shape[0]
        return self._outputs[:n].reshape(-1, 1)


class TestEvaluate:
    def setup_method(self):
        self.ids = [0, 1, 2, 3]
        self.scale = ScaleParams(min_score=2.0, max_score=8.0)
        self.raw = {0: 2.0, 1: 4.0, 2: 6.0, 3: 8.0}
        self.feats = {i: np.zeros(4) for i in self.ids}

    def test_perfect_predictor(self):
        scaled = np.array([(self.raw[i] - 2.0) / 6.0 for i in self.ids])
        model = _StubModel(scaled)
        report = evaluate(model, self.ids, self.feats, self.raw, self.scale)
        assert report.mse == 0.0
        assert report.pearson == pytest.approx(1.0, abs=1e-12)
        assert report.spearman == pytest.approx(1.0, abs=1e-12)
        assert report.kendall_tau == 1.0

    def test_constant_predictor_reports_undefined(self):
        model = _StubModel(np.full(4, 0.5))
        report = evaluate(model, self.ids, self.feats, self.raw, self.scale)
        assert report.pearson is None and report.spearman is None
        assert report.kendall_tau is None
        assert "undefined" in report.pearson_label
        scaled = np.array([(self.raw[i] - 2.0) / 6.0 for i in self.ids])
        assert report.mse == pytest.approx(np.mean((scaled - 0.5) ** 2), abs=1e-15)

    def test_mse_matches_loss_function(self):
        ids = list(range(10))
        feats = random_features(ids, ModelVariant.PORTRAIT_ONLY, seed=5)
        raw = {i: 2.0 + 0.5 * i for i in ids}
        scale_p = ScaleParams(min_score=2.0, max_score=6.5)
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=3)
        report = evaluate(model, ids, feats, raw, scale_p)
        preds = np.array([predict(model, feats[i]) for i in ids])[:, None]
        scaled = np.array([(raw[i] - 2.0) / 4.5 for i in ids])[:, None]
        assert report.mse == pytest.approx(mse_loss(preds, scaled)[0], abs=1e-15)

    def test_empty_test_set(self):
        model = _StubModel(np.zeros(0))
        with pytest.raises(EmptyTestSetError):
            evaluate(model, [], self.feats, self.raw, self.scale)


class TestScaleLabels:
    def test_fit_on_train_side_only(self):
        chars = (make_character(0),)
        animes = tuple(
            make_anime(i, (0,), golden=score)
            for i, score in enumerate([3.0, 5.0, 7.0, 9.5])
        )
        corpus = Corpus(animes=animes, characters=chars)
        split = toy_split([0, 1, 2], [3])
        params, scaled, raw = scale_labels(corpus, split)
        assert params == ScaleParams(min_score=3.0, max_score=7.0)
        assert scaled[0] == 0.0 and scaled[2] == 1.0
        assert scaled[3] > 1.0  # test labels may exceed the train range
        assert raw[3] == 9.5

    def test_missing_golden_raises(self):
        corpus = Corpus(
            animes=(make_anime(0, (0,), golden=None), make_anime(1, (0,), golden=5.0)),
            characters=(make_character(0),),
        )
        with pytest.raises(DataError, match="golden"):
            scale_labels(corpus, toy_split([0], [1]))


class TestCheckpoints:
    @pytest.mark.parametrize("variant", list(ModelVariant))
    def test_round_trip_bit_exact(self, variant, tmp_path):
        model = build_model(variant, seed=11)
        path = tmp_path / "model.ckpt"
        save_checkpoint(model, path)
        loaded = load_checkpoint(path)
        assert loaded.variant == variant
        assert len(loaded.parameters()) == len(model.parameters())
        for a, b in zip(model.parameters(), loaded.parameters()):
            assert a.tobytes() == b.tobytes()
        # identical eval behavior
        rng = np.random.default_rng(0)
        inputs = tuple(rng.standard_normal((2, d)) for d in model.input_dims)
        assert np.array_equal(model.forward(inputs), loaded.forward(inputs))

    def test_save_twice_identical_bytes(self, tmp_path):
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=2)
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(model, p1)
        save_checkpoint(model, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=2)
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_corrupt_descriptor_fails_hash(self, tmp_path):
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=2)
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        data = bytearray(path.read_bytes())
        # Flip one byte inside the descriptor text (starts at offset 12).
        data[20] ^= 0x01
        path.write_bytes(bytes(data))
        with pytest.raises(SpecHashMismatchError):
            load_checkpoint(path)

    def test_truncated(self, tmp_path):
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=2)
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_trailing_bytes(self, tmp_path):
        model = build_model(ModelVariant.PORTRAIT_ONLY, seed=2)
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        path.write_bytes(path.read_bytes() + b"x")
        with pytest.raises(CheckpointFormatError, match="trailing"):
            load_checkpoint(path)


class TestFeatureBuilders:
    def make_corpus(self):
        chars = (make_character(0), make_character(1))
        animes = (make_anime(0, (0,)), make_anime(1, (0, 1)), make_anime(2, (1,)))
        return Corpus(animes=animes, characters=chars)

    def test_deep_features_variant_shapes(self):
        from animepop.features import EmbeddingKind, index_embeddings
        from animepop.synthetic import synthetic_embeddings

        corpus = self.make_corpus()
        store = index_embeddings(synthetic_embeddings(corpus, seed=0))
        full = deep_features(corpus, store, ModelVariant.FULL)
        assert set(full) == {0, 1, 2}
        assert [v.shape[0] for v in full[0]] == [768, 768, 49]
        syn = deep_features(corpus, store, ModelVariant.SYNOPSIS_ONLY)
        assert syn[1].shape == (768,)
        assert syn[1].dtype == np.float64
        assert np.allclose(syn[1], store[(1, EmbeddingKind.SYNOPSIS)])
        with pytest.raises(ValueError):
            deep_features(corpus, store, ModelVariant.TRADITIONAL)

    def test_traditional_features_dims_and_train_only_vocab(self):
        corpus = self.make_corpus()
        feats, vocab_syn, vocab_char = traditional_features(corpus, [0, 1])
        assert set(feats) == {0, 1, 2}
        assert all(v.shape == (2250,) for v in feats.values())
        assert vocab_syn.n_docs == 2  # only the two train documents

    def test_run_manifest_is_deterministic(self, tmp_path):
        p1, p2 = tmp_path / "m1.txt", tmp_path / "m2.txt"
        for p in (p1, p2):
            write_run_manifest(
                p,
                variant=ModelVariant.FULL,
                seed=42,
                config=TrainConfig(),
                scale_params=ScaleParams(1.86, 9.06),
                train_fraction=0.815,
                n_train=81,
                n_test=19,
                report=None,
            )
        text = p1.read_text()
        assert p1.read_bytes() == p2.read_bytes()
        assert "variant=full" in text
        assert "sigmoid" in text  # the substituted final activation is called out
        assert "seed=42" in text
