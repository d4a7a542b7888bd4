#include "mmdalign/io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mmdalign;

namespace {

TEST(MatrixFile, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  const Matrix m = oracle::gaussian(7, 5, rng) * 1e-3;
  oracle::TempDir dir("io");
  save_matrix(m, dir.path() / "m.txt");
  EXPECT_EQ(load_matrix(dir.path() / "m.txt"), m);
}

TEST(MatrixFile, RejectsDamagedFiles) {
  oracle::TempDir dir("io");
  EXPECT_THROW(load_matrix(dir.path() / "none.txt"), ConfigError);
  EXPECT_THROW(load_matrix(dir.file("a.txt", "")), Error);
  EXPECT_THROW(load_matrix(dir.file("b.txt", "2 2\n1 2\n3\n")), Error);
  EXPECT_THROW(load_matrix(dir.file("c.txt", "1 2\n1 x\n")), Error);
}

TEST(Checkpoint, RoundTrip) {
  std::mt19937_64 rng(5);
  Checkpoint ckpt;
  ckpt.epoch = 4;
  ckpt.criterion = 0.8125;
  ckpt.lr = 1.875e-5;
  ckpt.config = {{"batch_size", "1280"}, {"beta", "0.01"}};
  ckpt.mapping = {oracle::rotation(6, rng)};
  ckpt.projector = {oracle::rotation(6, rng).topRows(3), oracle::gaussian(6, 1, rng)};
  oracle::TempDir dir("io");
  save_checkpoint(ckpt, dir.path() / "c.ckpt");
  const auto back = load_checkpoint(dir.path() / "c.ckpt");
  EXPECT_EQ(back.epoch, ckpt.epoch);
  EXPECT_EQ(back.criterion, ckpt.criterion);
  EXPECT_EQ(back.lr, ckpt.lr);
  EXPECT_EQ(back.config, ckpt.config);
  EXPECT_EQ(back.mapping.w, ckpt.mapping.w);
  EXPECT_EQ(back.projector.basis, ckpt.projector.basis);
  EXPECT_EQ(back.projector.offset, ckpt.projector.offset);
}

TEST(Checkpoint, RejectsForeignFile) {
  oracle::TempDir dir("io");
  EXPECT_THROW(load_checkpoint(dir.file("x.ckpt", "hello 1\n")), Error);
  EXPECT_THROW(load_checkpoint(dir.path() / "missing.ckpt"), ConfigError);
}

TEST(Sha256, KnownDigests) {
  oracle::TempDir dir("io");
  EXPECT_EQ(sha256_file(dir.file("abc", "abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_file(dir.file("empty", "")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

}  // namespace
