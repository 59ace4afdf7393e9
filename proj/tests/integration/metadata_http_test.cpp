#include <gtest/gtest.h>

#include <thread>

#include "dynostore/metadata/http.hpp"
#include "http_support.hpp"

namespace dynostore::metadata {
namespace {

using testing::MetadataTrio;
using testing::TempDir;

ObjectDescriptor descriptor(std::int64_t created_at) {
  ObjectDescriptor d;
  d.object_uuid = Uuid::random();
  d.size_bytes = 1;
  d.chunk_locations = {{0, Uuid::random()}};
  d.created_at = created_at;
  return d;
}

class MetadataHttpTest : public ::testing::Test {
 protected:
  MetadataHttpTest() : authority_(Bytes(32, 5), clock_), trio_(dir_.path(), authority_, clock_) {
    client_ = std::make_unique<MetadataClient>(trio_.endpoints());
    client_->create_namespace("alice", alice());
    client_->create_collection(ObjectPath::parse("/alice/c"), alice());
  }
  // Long-lived so tests can move the clock forward.
  std::string alice() {
    return authority_.issue("alice", {Mode::Read, Mode::Write}, std::chrono::hours(24 * 365)).encode();
  }
  ObjectDescriptor put(const std::string& p) {
    return client_->register_object(ObjectPath::parse(p), descriptor(clock_.now_ms()), alice());
  }

  TempDir dir_;
  ManualClock clock_;
  management::TokenAuthority authority_;
  MetadataTrio trio_;
  std::unique_ptr<MetadataClient> client_;
};

TEST_F(MetadataHttpTest, OperationsRoundTripThroughTheServers) {
  const auto v1 = put("/alice/c/o");
  const auto v2 = put("/alice/c/o");
  EXPECT_EQ(v2.version, 2u);
  EXPECT_EQ(client_->resolve(ObjectPath::parse("/alice/c/o"), std::nullopt, alice()).object_uuid, v2.object_uuid);
  EXPECT_EQ(client_->resolve(ObjectPath::parse("/alice/c/o"), 1, alice()).object_uuid, v1.object_uuid);
  EXPECT_EQ(client_->history(ObjectPath::parse("/alice/c/o"), alice()).size(), 2u);
  EXPECT_EQ(client_->list(ObjectPath::parse("/alice"), alice()).size(), 2u);
  client_->grant({"bob", Mode::Read, ObjectPath::parse("/alice/c"), false}, alice());
  EXPECT_TRUE(client_->check(ObjectPath::parse("/alice/c/o"), "bob", Mode::Read, alice()));
  EXPECT_ERRC(client_->create_collection(ObjectPath::parse("/alice/c"), alice()), Errc::AlreadyExists);
  const auto sub = client_->create_collection(ObjectPath::parse("/alice/c/sub"), alice());
  EXPECT_EQ(client_->collection_path(sub, alice()), ObjectPath::parse("/alice/c/sub"));
  EXPECT_ERRC(client_->collection_path(Uuid::random(), alice()), Errc::CollectionNotFound);
  EXPECT_ERRC(client_->resolve(ObjectPath::parse("/alice/c/none"), std::nullopt, alice()), Errc::NotFound);
  EXPECT_EQ(client_->evict(ObjectPath::parse("/alice/c/o"), alice()).size(), 2u);
}

TEST_F(MetadataHttpTest, MinorityLossKeepsServingAndMajorityLossRefusesWrites) {
  const auto v1 = put("/alice/c/o");
  trio_.stop(2);
  EXPECT_EQ(put("/alice/c/o").version, 2u);
  EXPECT_EQ(client_->resolve(ObjectPath::parse("/alice/c/o"), 1, alice()).object_uuid, v1.object_uuid);
  trio_.stop(1);
  try {
    put("/alice/c/o");
    FAIL() << "write without a majority succeeded";
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::ConsensusFailed || e.code() == Errc::Unavailable) << errc_name(e.code());
  }
}

TEST_F(MetadataHttpTest, RestartedReplicaRecoversFromJournalAndPeers) {
  put("/alice/c/a");
  trio_.stop(2);
  const auto missed = put("/alice/c/b");
  trio_.start(2);
  const auto key = object_key(ObjectPath::parse("/alice/c/b"));
  for (int i = 0; i < 100 && trio_.node(2).replica().read(key).head != missed.object_uuid; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_EQ(trio_.node(2).replica().read(key).head, missed.object_uuid) << "anti-entropy did not catch up";
  EXPECT_TRUE(trio_.node(2).replica().read(object_key(ObjectPath::parse("/alice/c/a"))).exists());
  trio_.stop(0);
  EXPECT_EQ(client_->resolve(ObjectPath::parse("/alice/c/b"), std::nullopt, alice()).object_uuid, missed.object_uuid);
}

TEST_F(MetadataHttpTest, GarbageCollectionOverTheWire) {
  put("/alice/c/o");
  put("/alice/c/o");
  clock_.advance_days(31);
  const auto admin = authority_.issue("root", {Mode::Admin}, std::chrono::hours(1)).encode();
  EXPECT_EQ(client_->garbage_collect(clock_.now_ms(), admin).size(), 1u);
  EXPECT_ERRC(client_->resolve(ObjectPath::parse("/alice/c/o"), 1, alice()), Errc::VersionExpired);
}

}  // namespace
}  // namespace dynostore::metadata
