import warnings

import numpy as np
import pytest

from seqfusion import fusion
from seqfusion.cv import stratified_split
from seqfusion.data import Dataset, FeatureView
from seqfusion.exceptions import DegeneratePartitionWarning, InvalidConfig
from seqfusion.fusion import (FusionConfig, FusionModel, Variant, predict_fusion,
                              train_early_fusion, train_image_only, train_prior,
                              train_sequential_fusion, with_grid)
from seqfusion.gbt import GBTConfig
from seqfusion.metrics import evaluate
from seqfusion.synth import SignalProfile, generate

FAST = FusionConfig(gbt=GBTConfig(n_estimators=40, max_depth=4))


def small_cohort(seed, **kw):
    kw.setdefault("d_image", 12)
    kw.setdefault("n", 300)
    return generate(SignalProfile(seed=seed, **kw))


def split_for(ds, seed=0):
    return stratified_split(ds.labels, (0.6, 0.2, 0.2), seed)


class RecordingDataset(Dataset):
    """Dataset that logs which modalities are read."""

    def __init__(self, base):
        super().__init__(base.sample_ids, base.labels, base.modalities)
        object.__setattr__(self, "reads", [])

    def view(self, name):
        self.reads.append(name)
        return super().view(name)


def test_config_validation():
    with pytest.raises(InvalidConfig):
        FusionConfig(prior_modality="image")
    with pytest.raises(InvalidConfig):
        FusionConfig(weight_grid=())
    with pytest.raises(InvalidConfig):
        FusionConfig(weight_grid=((0, 0), (1, 1)))
    assert len(FusionConfig().weight_grid) == 24


def test_config_round_trip():
    cfg = FusionConfig(weight_grid=((1, 0), (0.5, 1)), strategies=("stratified",))
    assert FusionConfig.from_dict(cfg.to_dict()) == cfg


def test_prior_learns_clinical_signal():
    ds = generate(SignalProfile(proportions={"clinical_only": 1.0}, effect_size=3.0, seed=2))
    split = split_for(ds, 2)
    model = train_prior(ds, split)
    _, pred = predict_fusion(model, ds, split.test)
    assert evaluate(ds.labels[split.test], pred).sensitivity > 0.9


def test_image_only_learns_image_signal():
    ds = generate(SignalProfile(proportions={"image_only": 1.0}, effect_size=3.0, seed=2))
    split = split_for(ds, 2)
    model = train_image_only(ds, split)
    _, pred = predict_fusion(model, ds, split.test)
    assert evaluate(ds.labels[split.test], pred).sensitivity > 0.9


@pytest.mark.parametrize("trainer,group", [(train_prior, "image_only"), (train_image_only, "clinical_only")])
def test_uninformative_view_is_chance(trainer, group):
    scores = []
    for seed in range(10):
        ds = small_cohort(seed, proportions={group: 1.0})
        split = split_for(ds, seed)
        _, pred = predict_fusion(trainer(ds, split, FAST), ds, split.test)
        m = evaluate(ds.labels[split.test], pred)
        scores.append(0.5 * (m.sensitivity + m.specificity))
    assert abs(np.mean(scores) - 0.5) <= 0.1


@pytest.mark.parametrize("trainer,modality", [(train_prior, "clinical"), (train_image_only, "image")])
def test_perfect_feature_fits_training_data(trainer, modality):
    ds = small_cohort(4, proportions={"none": 1.0})
    views = dict(ds.modalities)
    v = views[modality]
    views[modality] = FeatureView(modality, v.feature_names,
                                  np.column_stack([ds.labels, v.matrix[:, 1:]]))
    ds = Dataset(ds.sample_ids, ds.labels, views)
    split = split_for(ds)
    _, pred = predict_fusion(trainer(ds, split), ds, split.train)
    assert np.array_equal(pred, ds.labels[split.train])


def test_early_fusion_beats_single_views_on_complementary_signal():
    f1 = {v: [] for v in "BCD"}
    for seed in range(10):
        ds = generate(SignalProfile(proportions={"clinical_only": 0.5, "image_only": 0.5},
                                    effect_size=2.5, d_image=16, n=400, seed=seed))
        split = split_for(ds, seed)
        for v in f1:
            _, pred = predict_fusion(fusion.train_variant(v, ds, split, FAST), ds, split.test)
            f1[v].append(evaluate(ds.labels[split.test], pred).f1)
    assert np.mean(f1["B"]) > max(np.mean(f1["C"]), np.mean(f1["D"]))


def test_early_fusion_with_duplicated_image_matches_image_only():
    ds = small_cohort(5)
    img = ds.view("image")
    dup = FeatureView("clinical", tuple("clin_" + n for n in img.feature_names), img.matrix)
    ds = Dataset(ds.sample_ids, ds.labels, {"clinical": dup, "image": img})
    split = split_for(ds)
    # Concatenate image first so the lower-index copy is the image column.
    cfg = FusionConfig(prior_modality="image", second_modality="clinical", gbt=FAST.gbt)
    early = train_early_fusion(ds, split, cfg)
    single = train_image_only(ds, split, FusionConfig(gbt=FAST.gbt))
    pe, _ = predict_fusion(early, ds)
    ps, _ = predict_fusion(single, ds)
    assert pe.tobytes() == ps.tobytes()
    assert early.final_model.n_features == 2 * img.width


def test_early_fusion_width():
    ds = small_cohort(6)
    model = train_early_fusion(ds, split_for(ds), FAST)
    assert model.final_model.n_features == ds.view("clinical").width + ds.view("image").width


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.filterwarnings("ignore::seqfusion.exceptions.DegeneratePartitionWarning")
@pytest.mark.parametrize("partition", ["in_sample", "out_of_fold"])
def test_beta_zero_reduces_to_image_only(seed, partition):
    ds = small_cohort(seed)
    split = split_for(ds, seed)
    cfg = with_grid(FusionConfig(gbt=FAST.gbt, partition=partition), [(1.0, 0.0)])
    seq = train_sequential_fusion(ds, split, cfg)
    img = train_image_only(ds, split, cfg)
    assert seq.final_model.to_json() == img.final_model.to_json()
    probe = generate(SignalProfile(seed=99, d_image=12, n=50))
    assert predict_fusion(seq, probe)[0].tobytes() == predict_fusion(img, probe)[0].tobytes()


def perfect_prior_dataset(seed=7):
    ds = small_cohort(seed, proportions={"image_only": 1.0})
    clin = ds.view("clinical")
    perfect = FeatureView("clinical", clin.feature_names,
                          np.column_stack([ds.labels, clin.matrix[:, 1:]]))
    return Dataset(ds.sample_ids, ds.labels, {"clinical": perfect, "image": ds.view("image")})


def test_perfect_prior_gives_empty_s2_and_class_weighting():
    ds = perfect_prior_dataset()
    split = split_for(ds)
    cfg = with_grid(FusionConfig(gbt=FAST.gbt), [(1.0, 0.0), (1.0, 1.0)], ["stratified"])
    with pytest.warns(DegeneratePartitionWarning):
        seq = train_sequential_fusion(ds, split, cfg)
    assert seq.partition_sizes[1] == 0 and seq.degenerate_partition
    img = train_image_only(ds, split, cfg)
    assert seq.final_model.to_json() == img.final_model.to_json()


def test_selection_is_deterministic():
    ds = small_cohort(8)
    split = split_for(ds, 8)
    cfg = with_grid(FusionConfig(gbt=FAST.gbt), [(1, 0), (1, 0.5), (0.5, 1), (1, 1)])
    a = train_sequential_fusion(ds, split, cfg)
    b = train_sequential_fusion(ds, split, cfg)
    assert a.chosen_weighting() == b.chosen_weighting()
    assert a.to_json() == b.to_json()
    par = train_sequential_fusion(ds, split, FusionConfig(**{**cfg.__dict__, "n_jobs": 3}))
    assert par.to_json() == a.to_json()


def test_selection_tie_breaks():
    rank = {fusion.Strategy.SAME: 0, fusion.Strategy.STRATIFIED: 1}
    C = fusion.Candidate
    cands = [C(1.0, 1.0, fusion.Strategy.SAME, 0.5, 0.6), C(1.0, 0.5, fusion.Strategy.STRATIFIED, 0.5, 0.6),
             C(0.5, 0.5, fusion.Strategy.STRATIFIED, 0.5, 0.6), C(0.5, 0.5, fusion.Strategy.SAME, 0.5, 0.6),
             C(1.0, 0.0, fusion.Strategy.SAME, 0.5, 0.5)]
    best = min(cands, key=lambda c: fusion._selection_key(c, rank))
    assert (best.alpha, best.beta, best.strategy) == (0.5, 0.5, fusion.Strategy.SAME)
    cands.append(C(1.0, 1.0, fusion.Strategy.STRATIFIED, 0.51, 0.1))
    assert min(cands, key=lambda c: fusion._selection_key(c, rank)).f1 == 0.51


def test_candidates_cover_grid_and_skip_all_zero():
    ds = perfect_prior_dataset(9)
    cfg = with_grid(FusionConfig(gbt=FAST.gbt), [(0.0, 1.0), (1.0, 1.0)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneratePartitionWarning)
        model = train_sequential_fusion(ds, split_for(ds), cfg)
    got = [(c.alpha, c.beta, c.strategy.value, c.skipped) for c in model.candidates]
    assert got == [(0.0, 1.0, "same", False), (0.0, 1.0, "stratified", True),
                   (1.0, 1.0, "same", False), (1.0, 1.0, "stratified", False)]


def test_routing():
    base = small_cohort(10)
    split = split_for(base)
    seq = train_sequential_fusion(base, split, with_grid(FusionConfig(gbt=FAST.gbt), [(1, 1)]))
    prior = train_prior(base, split, FAST)
    for model, expected in ((seq, ["image"]), (prior, ["clinical"])):
        ds = RecordingDataset(base)
        predict_fusion(model, ds, split.test)
        assert ds.reads == expected
    assert seq.prior_model is not None and seq.routing == ("image",)


def test_prior_ignores_image_perturbation():
    ds = small_cohort(11)
    split = split_for(ds)
    model = train_prior(ds, split, FAST)
    noisy = Dataset(ds.sample_ids, ds.labels, {
        "clinical": ds.view("clinical"),
        "image": FeatureView("image", ds.view("image").feature_names, ds.view("image").matrix + 17.0)})
    assert predict_fusion(model, ds)[0].tobytes() == predict_fusion(model, noisy)[0].tobytes()


def test_early_fusion_recovers_separable_training_labels():
    rng = np.random.default_rng(0)
    y = np.array([0, 1] * 20)
    ds = Dataset(tuple(map(str, range(40))), y, {
        "clinical": FeatureView("clinical", ("clin_a",), (y + rng.uniform(-0.3, 0.3, 40))[:, None]),
        "image": FeatureView("image", ("img_a",), rng.normal(size=(40, 1)))})
    split = split_for(ds)
    model = train_early_fusion(ds, split, FAST)
    _, pred = predict_fusion(model, ds, split.train)
    assert np.array_equal(pred, y[split.train])


def test_prior_knowledge_does_not_hurt_when_image_separates_s2():
    # Image separates every sample (s2 included); clinical view is informative for half.
    rng = np.random.default_rng(3)
    n = 240
    y = (np.arange(n) % 4 == 0).astype(int)
    clin_informative = np.arange(n) % 2 == 0
    clin = np.where(clin_informative, y * 2.0 - 1.0, 0.0) + rng.normal(scale=0.3, size=n)
    img = np.column_stack([y * 2.0 - 1.0 + rng.uniform(-0.4, 0.4, n), rng.normal(size=(n, 3))])
    ds = Dataset(tuple(map(str, range(n))), y, {
        "clinical": FeatureView("clinical", ("clin_a",), clin[:, None]),
        "image": FeatureView("image", ("img_a", "img_b", "img_c", "img_d"), img)})
    split = split_for(ds, 1)
    cfg = with_grid(FusionConfig(gbt=FAST.gbt), [(1.0, 0.0), (1.0, 1.0)], ["same"])
    model = train_sequential_fusion(ds, split, cfg)
    f1 = {(c.alpha, c.beta): c.f1 for c in model.candidates}
    assert model.partition_sizes[1] > 0
    assert f1[(1.0, 1.0)] >= f1[(1.0, 0.0)]


def test_fusion_model_serialization():
    ds = small_cohort(12)
    split = split_for(ds)
    model = train_sequential_fusion(ds, split, with_grid(FusionConfig(gbt=FAST.gbt), [(1, 1)]))
    back = FusionModel.from_dict(model.to_dict())
    assert back.variant is Variant.SEQUENTIAL
    assert back.chosen_weighting() == model.chosen_weighting()
    assert (model.weighting.alpha, model.weighting.beta) == (1.0, 1.0)
    assert back.to_json() == model.to_json()
    assert predict_fusion(back, ds)[0].tobytes() == predict_fusion(model, ds)[0].tobytes()
    early = FusionModel.from_dict(train_early_fusion(ds, split, FAST).to_dict())
    assert early.prior_model is None and early.weighting is None


def test_second_stage_concat_option():
    ds = small_cohort(13)
    cfg = with_grid(FusionConfig(gbt=FAST.gbt, second_stage_concat=True), [(1, 1)])
    model = train_sequential_fusion(ds, split_for(ds), cfg)
    assert model.routing == ("clinical", "image")
    assert model.final_model.n_features == ds.view("clinical").width + ds.view("image").width
