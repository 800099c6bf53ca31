#include <barrier>
#include <chrono>
#include <stdexcept>
#include <thread>

#include <gtest/gtest.h>

#include "vpfix/annotation_store.hpp"
#include "vpfix/atomic_file.hpp"
#include "vpfix/dataset_pipeline.hpp"
#include "vpfix_test/expect.hpp"
#include "vpfix_test/fixtures.hpp"
#include "vpfix_test/temp_dir.hpp"

using namespace vpfix;
namespace fs = std::filesystem;

namespace {

constexpr int kW = 64;
constexpr int kH = 48;

struct Fixture {
  test::TempDir dir;
  std::chrono::system_clock::time_point now =
      std::chrono::system_clock::time_point(std::chrono::seconds(1714564800));

  Fixture() {
    fs::create_directories(dir / "images");
    for (const char* id : {"a", "b", "c"}) {
      io::write_file_atomic(dir / "images" / (std::string(id) + ".png"),
                            io::encode_png(ScalarField(kW, kH, 0.5)));
    }
    test::write_text(dir / "images" / "notes.txt", "ignored");
  }

  StoreConfig config() {
    StoreConfig cfg;
    cfg.images_dir = dir / "images";
    cfg.store_dir = dir / "store";
    cfg.clock = [this] { return now; };
    return cfg;
  }
};

Json record(const std::string& id, double shift = 0.0) {
  Json j = Json::parse(R"({
    "schema_version": 1,
    "image_size": [64, 48],
    "target_vp": [32, -100, 1],
    "pairs": [{"original": [[10, 40], [20, 10]], "desired": [[14, 40], [24, 10]]}],
    "dilation_px": 2
  })");
  j["image_id"] = id;
  j["pairs"][0]["desired"][1][0] = 24.0 + shift;
  return j;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = test::read_text(e.path());
  }
  return out;
}

}  // namespace

TEST(AnnotationStore, Timestamps) {
  EXPECT_EQ(format_timestamp(std::chrono::system_clock::time_point(std::chrono::seconds(0))),
            "1970-01-01T00:00:00.000000Z");
  const auto t = std::chrono::system_clock::time_point(std::chrono::seconds(1714564800)) +
                 std::chrono::microseconds(1234);
  EXPECT_EQ(format_timestamp(t), "2024-05-01T12:00:00.001234Z");
}

TEST(AnnotationStore, MissingImageDirIsUnavailable) {
  test::TempDir dir;
  StoreConfig cfg;
  cfg.images_dir = dir / "nope";
  cfg.store_dir = dir / "store";
  EXPECT_VPFIX_ERROR(AnnotationStore{cfg}, ErrorCode::kStoreUnavailable);
}

TEST(AnnotationStore, ListsImagesSorted) {
  Fixture f;
  AnnotationStore store(f.config());
  const auto images = store.list_images();
  ASSERT_EQ(images.size(), 3u);
  EXPECT_EQ(images[0].image_id, "a");
  EXPECT_EQ(images[2].image_id, "c");
  EXPECT_EQ(images[1].size.width, kW);
  EXPECT_FALSE(images[0].annotated);
  EXPECT_EQ(store.image("b").file.filename(), "b.png");
  EXPECT_VPFIX_ERROR(store.image("zzz"), ErrorCode::kNotFound);
  EXPECT_VPFIX_ERROR(store.image("../images/a"), ErrorCode::kNotFound);
  EXPECT_FALSE(is_safe_id(".hidden"));
  EXPECT_FALSE(is_safe_id("a/b"));
  EXPECT_TRUE(is_safe_id("img_01.v2-x"));
}

TEST(AnnotationStore, PutGetRoundTrip) {
  Fixture f;
  AnnotationStore store(f.config());
  EXPECT_FALSE(store.get_annotation("a").has_value());
  const auto saved = store.put_annotation("a", record("a"), std::nullopt);
  EXPECT_EQ(saved.created_at, "2024-05-01T12:00:00.000000Z");
  EXPECT_EQ(saved.updated_at, saved.created_at);
  ASSERT_TRUE(saved.mask_coverage.has_value());
  EXPECT_GT(*saved.mask_coverage, 0.0);
  EXPECT_EQ(*saved.mask_coverage, store.mask("a").coverage);

  const auto loaded = store.get_annotation("a");
  ASSERT_TRUE(loaded.has_value());
  EXPECT_TRUE(same_content(*loaded, saved));
  EXPECT_EQ(loaded->updated_at, saved.updated_at);
  EXPECT_TRUE(store.image("a").annotated);

  // Same clock reading: the store still issues a strictly later stamp.
  const auto second = store.put_annotation("a", record("a", 1.0), saved.updated_at);
  EXPECT_EQ(second.created_at, saved.created_at);
  EXPECT_EQ(second.updated_at, "2024-05-01T12:00:00.000001Z");
}

TEST(AnnotationStore, Preconditions) {
  Fixture f;
  AnnotationStore store(f.config());
  EXPECT_VPFIX_ERROR(store.put_annotation("a", record("a"), std::string("2024")),
                     ErrorCode::kConflict);
  const auto first = store.put_annotation("a", record("a"), std::string(""));
  EXPECT_VPFIX_ERROR(store.put_annotation("a", record("a"), std::nullopt),
                     ErrorCode::kPreconditionRequired);
  EXPECT_VPFIX_ERROR(store.put_annotation("a", record("a"), std::string("stale")),
                     ErrorCode::kConflict);
  f.now += std::chrono::seconds(5);
  EXPECT_NO_THROW(store.put_annotation("a", record("a"), first.updated_at));
  EXPECT_VPFIX_ERROR(store.put_annotation("a", record("a"), first.updated_at),
                     ErrorCode::kConflict);
}

TEST(AnnotationStore, RejectsMismatchedRecords) {
  Fixture f;
  AnnotationStore store(f.config());
  EXPECT_VPFIX_ERROR(store.put_annotation("a", record("b"), std::nullopt),
                     ErrorCode::kValidationFailed);
  auto wrong_size = record("a");
  wrong_size["image_size"] = Json::array({10, 10});
  EXPECT_VPFIX_ERROR(store.put_annotation("a", wrong_size, std::nullopt),
                     ErrorCode::kValidationFailed);
  EXPECT_VPFIX_ERROR(store.put_annotation("zzz", record("zzz"), std::nullopt),
                     ErrorCode::kNotFound);
  EXPECT_FALSE(store.get_annotation("a").has_value());
}

TEST(AnnotationStore, ConcurrentWritersExactlyOneWins) {
  Fixture f;
  AnnotationStore store(f.config());
  auto current = store.put_annotation("a", record("a"), std::nullopt).updated_at;
  for (int round = 0; round < 25; ++round) {
    std::barrier sync(2);
    int ok = 0;
    int conflicts = 0;
    std::mutex m;
    auto writer = [&](double shift) {
      sync.arrive_and_wait();
      try {
        store.put_annotation("a", record("a", shift), current);
        std::lock_guard lock(m);
        ++ok;
      } catch (const Error& e) {
        std::lock_guard lock(m);
        if (e.code() == ErrorCode::kConflict) ++conflicts;
      }
    };
    std::thread t1(writer, 1.0);
    std::thread t2(writer, 2.0);
    t1.join();
    t2.join();
    EXPECT_EQ(ok, 1) << "round " << round;
    EXPECT_EQ(conflicts, 1) << "round " << round;
    current = store.get_annotation("a")->updated_at;
  }
}

TEST(AnnotationStore, CrashDuringWriteKeepsPreviousRecord) {
  Fixture f;
  AnnotationStore store(f.config());
  const auto first = store.put_annotation("a", record("a"), std::nullopt);
  io::set_write_fault_hook([](const fs::path&) { throw std::runtime_error("crash"); });
  EXPECT_THROW(store.put_annotation("a", record("a", 3.0), first.updated_at), std::runtime_error);
  io::set_write_fault_hook({});
  const auto after = store.get_annotation("a");
  ASSERT_TRUE(after.has_value());
  EXPECT_TRUE(same_content(*after, first));
  EXPECT_EQ(after->updated_at, first.updated_at);
  EXPECT_NO_THROW(store.put_annotation("a", record("a", 3.0), first.updated_at));
}

TEST(AnnotationStore, MaskAndConditionImages) {
  Fixture f;
  AnnotationStore store(f.config());
  EXPECT_VPFIX_ERROR(store.mask("a"), ErrorCode::kIncompleteAnnotation);
  EXPECT_VPFIX_ERROR(store.mask_png("zzz"), ErrorCode::kNotFound);
  const auto rec = store.put_annotation("a", record("a"), std::nullopt);
  const auto m = store.mask("a");
  EXPECT_EQ(m.mask, build_mask(rec.pairs, kW, kH, 2).mask);
  EXPECT_EQ(store.mask_png("a"), io::encode_png(m.mask));
  const auto cond = render_condition({{rec.pairs[0].desired, 0, 0.0}}, kW, kH, 3);
  EXPECT_EQ(store.condition_png("a"), io::encode_png(cond));
}

TEST(AnnotationStore, ExportLayoutAndDeterminism) {
  Fixture f;
  AnnotationStore store(f.config());
  store.put_annotation("a", record("a"), std::nullopt);
  f.now += std::chrono::seconds(1);
  store.put_annotation("c", record("c", 2.0), std::nullopt);

  const auto manifest = store.export_dataset("set1", {"c", "a"});
  EXPECT_EQ(manifest.created_at, "2024-05-01T12:00:01.000000Z");
  ASSERT_EQ(manifest.images.size(), 2u);
  EXPECT_EQ(manifest.images[0].image_id, "c");
  EXPECT_EQ(manifest.images[1].mask_file, "masks/a.mask.png");
  const auto root = store.export_dir("set1");
  for (const char* rel : {"manifest.json", "images/a.png", "annotations/c.annotation.json",
                          "masks/c.mask.png", "cond/a.cond.png"}) {
    EXPECT_TRUE(fs::exists(root / rel)) << rel;
  }
  const auto mj = read_json_file(root / "manifest.json");
  EXPECT_TRUE(mj["images"][0]["depth_file"].is_null());
  EXPECT_EQ(io::read_bitmap(root / "masks/a.mask.png"), store.mask("a").mask);

  const auto first = snapshot(root);
  f.now += std::chrono::seconds(60);
  store.export_dataset("set1", {"c", "a"});
  EXPECT_EQ(snapshot(root), first);
  EXPECT_FALSE(fs::exists(f.dir / "store" / "exports" / ".set1.staging"));
}

TEST(AnnotationStore, ExportRejectsIncompleteAndBadInput) {
  Fixture f;
  AnnotationStore store(f.config());
  store.put_annotation("a", record("a"), std::nullopt);
  try {
    store.export_dataset("s", {"a", "b", "c"});
    FAIL() << "export succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteAnnotation);
    ASSERT_EQ(e.details().size(), 2u);
    EXPECT_EQ(e.details()[0].field, "b");
    EXPECT_EQ(e.details()[1].field, "c");
  }
  EXPECT_FALSE(fs::exists(store.export_dir("s")));
  EXPECT_VPFIX_ERROR(store.export_dataset("s", {}), ErrorCode::kEmptyInput);
  EXPECT_VPFIX_ERROR(store.export_dataset("s", {"a", "a"}), ErrorCode::kValidationFailed);
  EXPECT_VPFIX_ERROR(store.export_dataset("../x", {"a"}), ErrorCode::kValidationFailed);
  EXPECT_VPFIX_ERROR(store.export_dataset("s", {"zzz"}), ErrorCode::kNotFound);
}

TEST(AnnotationStore, CandidateCacheKeyedByConfig) {
  Fixture f;
  io::write_file_atomic(f.dir / "images" / "box.png", io::encode_png(test::box_scene(1).image));
  AnnotationStore store(f.config());
  const auto first = store.vp_candidates("box");
  EXPECT_FALSE(first->empty());
  EXPECT_EQ(store.vp_candidates("box").get(), first.get());

  auto cfg = f.config();
  cfg.ransac.rng_seed = 99;
  AnnotationStore other(cfg);
  const auto seeded = other.vp_candidates("box");
  EXPECT_NE(seeded.get(), first.get());
  EXPECT_VPFIX_ERROR(store.vp_candidates("zzz"), ErrorCode::kNotFound);
}
