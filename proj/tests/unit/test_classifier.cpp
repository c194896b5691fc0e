#include <gtest/gtest.h>

#include "czsl/classifier/classifier.hpp"
#include "czsl/core/random.hpp"

using namespace czsl;

namespace {

// Centers depend on `seed` only; `split` selects an independent noise stream.
LabeledSet<float> blobs(std::size_t classes, std::size_t per_class, std::size_t dim, std::uint64_t seed,
                        double spread = 0.3, std::uint64_t split = 0) {
  Rng center_rng(seed);
  const MatrixF centers =
      center_rng.normal_matrix<float>(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim), 3.0);
  Rng rng(Rng::derive(seed, 1 + split));
  LabeledSet<float> s;
  s.features.resize(static_cast<Eigen::Index>(classes * per_class), static_cast<Eigen::Index>(dim));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      s.features.row(row++) =
          centers.row(static_cast<Eigen::Index>(c)) + rng.normal_matrix<float>(1, static_cast<Eigen::Index>(dim), spread);
      s.labels.push_back(static_cast<std::uint32_t>(c));
    }
  return s;
}

TrainConfig quick(nn::Activation act = nn::Activation::relu) {
  TrainConfig c;
  c.classifier_epochs = 10;
  c.classifier_lr = 1e-3;
  c.classifier_hidden = 32;
  c.batch_size = 32;
  c.classifier_activation = act;
  return c;
}

}  // namespace

TEST(Argmax, TiesGoToSmallerIndex) {
  Matrix<double> logits(3, 4);
  logits << 1, 1, 0, 0,
            0, 2, 2, 2,
            5, 5, 5, 5;
  EXPECT_EQ(argmax_rows(logits), (Labels{0, 1, 0}));
}

TEST(Argmax, OneHotRowsRecoverTheirIndex) {
  Matrix<double> logits = Matrix<double>::Zero(5, 5);
  for (int i = 0; i < 5; ++i) logits(i, 4 - i) = 1.0;
  EXPECT_EQ(argmax_rows(logits), (Labels{4, 3, 2, 1, 0}));
}

TEST(Argmax, MatchesLinearScanOnRandomLogits) {
  Rng rng(3);
  const auto logits = rng.normal_matrix<double>(50, 7);
  const auto got = argmax_rows(logits);
  for (int i = 0; i < 50; ++i) {
    std::uint32_t best = 0;
    for (int j = 0; j < 7; ++j)
      if (logits(i, j) > logits(i, static_cast<Eigen::Index>(best))) best = static_cast<std::uint32_t>(j);
    EXPECT_EQ(got[static_cast<std::size_t>(i)], best);
  }
}

TEST(Accuracy, PerfectAndHalf) {
  const Labels truth{0, 0, 1, 1};
  EXPECT_EQ(accuracy_from_predictions(truth, truth, {0, 1}), 1.0);
  EXPECT_EQ(accuracy_from_predictions({0, 1, 0, 1}, truth, {0, 1}), 0.5);
}

TEST(Accuracy, PerClassVersusPerSample) {
  // class 0: 9/10 correct, class 1: 0/10 correct
  Labels truth, pred;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(0);
    pred.push_back(i == 0 ? 1 : 0);
  }
  for (int i = 0; i < 10; ++i) {
    truth.push_back(1);
    pred.push_back(0);
  }
  EXPECT_DOUBLE_EQ(accuracy_from_predictions(pred, truth, {0, 1}), 0.45);
  // imbalanced classes separate the two averagings
  truth.push_back(0);
  pred.push_back(0);
  EXPECT_DOUBLE_EQ(accuracy_from_predictions(pred, truth, {0, 1}), (10.0 / 11.0) / 2.0);
  EXPECT_DOUBLE_EQ(accuracy_from_predictions(pred, truth, {0, 1}, AccuracyAveraging::per_sample), 10.0 / 21.0);
}

TEST(Accuracy, SubsetIgnoresOtherClassesButCountsConfusionsWithThem) {
  const Labels truth{0, 1, 2, 2};
  const Labels pred{0, 2, 2, 0};
  EXPECT_EQ(accuracy_from_predictions(pred, truth, {2}), 0.5);
  EXPECT_EQ(accuracy_from_predictions(pred, truth, {1}), 0.0);
}

TEST(Accuracy, RejectsEmptyInputs) {
  EXPECT_THROW(accuracy_from_predictions({0}, {0}, {}), Error);
  EXPECT_THROW(accuracy_from_predictions({0, 0}, {0, 0}, {0, 1}), Error);
  EXPECT_THROW(accuracy_from_predictions({0}, {0, 1}, {0}), ShapeError);
}

TEST(Classifier, LearnsSeparableBlobs) {
  const auto train = blobs(5, 60, 8, 1);
  const auto test = blobs(5, 20, 8, 1, 0.3, 1);
  const auto clf = train_classifier(train, 5, quick(), 0, 2);
  EXPECT_EQ(clf.num_classes(), 5u);
  EXPECT_EQ(clf.trained_for_task, 2u);
  EXPECT_GE(per_class_accuracy(clf, test.features, test.labels, {0, 1, 2, 3, 4}), 0.95);
}

TEST(Classifier, DeterministicInSeed) {
  const auto train = blobs(3, 20, 4, 2);
  const auto a = train_classifier(train, 3, quick(), 7);
  const auto b = train_classifier(train, 3, quick(), 7);
  EXPECT_EQ(a.net, b.net);
  const auto c = train_classifier(train, 3, quick(), 8);
  EXPECT_FALSE(a.net == c.net);
}

TEST(Classifier, LabelSpaceCanExceedTrainingLabels) {
  const auto train = blobs(3, 20, 4, 2);
  const auto clf = train_classifier(train, 10, quick(), 0);
  EXPECT_EQ(clf.num_classes(), 10u);
  EXPECT_THROW(train_classifier(train, 2, quick(), 0), Error);
  EXPECT_THROW(train_classifier(LabeledSet<float>{}, 2, quick(), 0), Error);
}

TEST(Classifier, ReluIsNotWorseThanLinear) {
  // overlapping blobs so neither variant saturates
  double relu = 0, linear = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto train = blobs(6, 50, 8, 10 + seed, 1.5);
    const auto test = blobs(6, 30, 8, 10 + seed, 1.5, 1);
    const std::set<std::uint32_t> all{0, 1, 2, 3, 4, 5};
    relu += per_class_accuracy(train_classifier(train, 6, quick(nn::Activation::relu), seed), test.features,
                               test.labels, all);
    linear += per_class_accuracy(train_classifier(train, 6, quick(nn::Activation::identity), seed), test.features,
                                 test.labels, all);
  }
  EXPECT_GE(relu / 5, linear / 5 - 0.02);
}
