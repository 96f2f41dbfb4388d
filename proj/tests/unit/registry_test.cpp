#include "forge/kv.hpp"
#include "forge/registry.hpp"
#include "support/test_support.hpp"
#include "unit_support.hpp"

namespace forge {
namespace {

using testing::TempDir;

Job sample(Store& store, std::string name = "sample") {
    Job j;
    j.id = store.allocate_id();
    j.name = std::move(name);
    j.application.name = "generic";
    j.application.version = "1.0";
    j.workflow.elements = {Executable{"echo", {"hi", "there"}}, Parameter{"seed", std::int64_t{42}}, InputFile{"a.dat", "/tmp/a.dat"},
                           OutputFile{"out.txt", ""}};
    j.requirements.entries = {{"MinMemoryMB", 512.0}, {"Queue", std::string("short")}};
    j.output_dir = "output";
    j.created_at = j.updated_at = 1000;
    return j;
}

TEST(Kv, ParseSerializeRoundTrip) {
    auto doc = KvDocument::parse("# comment\nb = two words\na = 1\n\nc.0 = x\nc.2 = z\nd = back\\\\slash\\nnewline\n");
    EXPECT_EQ(doc.get_or("b", ""), "two words");
    EXPECT_EQ(doc.indices("c"), (std::vector<int>{0, 2}));
    EXPECT_EQ(doc.list("c"), (std::vector<std::string>{"x", "z"}));
    EXPECT_EQ(doc.at("d"), "back\\slash\nnewline");
    auto text = doc.serialize();
    EXPECT_EQ(text.substr(0, 6), "a = 1\n");
    EXPECT_EQ(KvDocument::parse(text), doc);
    EXPECT_EQ(doc.serialize("header").substr(0, 9), "# header\n");
}

TEST(Kv, Errors) {
    EXPECT_FORGE_ERROR(KvDocument::parse("no equals here\n"), errc::ParseError);
    EXPECT_FORGE_ERROR(KvDocument::parse("a = 1\na = 2\n"), errc::ParseError);
    EXPECT_FORGE_ERROR(KvDocument::parse("a = 1").at("b"), errc::ParseError);
}

TEST(Store, SaveLoadRoundTrip) {
    TempDir dir;
    Store store(dir.path());
    auto j = sample(store);
    store.save(j);
    EXPECT_EQ(store.load(j.id), j);
    EXPECT_EQ(j.id, "j000001");
    EXPECT_TRUE(store.exists(j.id));
    Store reopened(dir.path());
    EXPECT_EQ(reopened.load(j.id), j);
    EXPECT_EQ(reopened.next_id(), 2);
}

TEST(Store, ListFilters) {
    TempDir dir;
    Store store(dir.path());
    EXPECT_TRUE(store.list(JobStatus::Completed).empty());
    auto a = sample(store, "a");
    auto b = sample(store, "b");
    b.status = JobStatus::Completed;
    store.save(a);
    store.save(b);
    auto done = store.list(JobStatus::Completed);
    ASSERT_EQ(done.size(), 1u);
    EXPECT_EQ(done[0].name, "b");
    auto all = store.list();
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].id, "j000001");
}

TEST(Store, IdsNeverReused) {
    TempDir dir;
    Store store(dir.path());
    auto a = sample(store);
    store.save(a);
    store.remove(a.id);
    EXPECT_FALSE(store.exists(a.id));
    EXPECT_EQ(store.allocate_id(), "j000002");
    EXPECT_FORGE_ERROR(store.load(a.id), errc::UnknownJob);
}

TEST(Store, TruncatedMetaIsCorrupt) {
    TempDir dir;
    Store store(dir.path());
    auto j = sample(store);
    store.save(j);
    auto meta = store.meta_path(j.id);
    auto text = read_file(meta);
    write_file(meta, text.substr(0, text.size() / 2));
    try {
        store.load(j.id);
        FAIL() << "expected CorruptStore";
    } catch (const Error& e) {
        EXPECT_EQ(e.name(), errc::CorruptStore);
        EXPECT_NE(e.detail().find("job.meta"), std::string::npos);
    }
}

TEST(Store, CorruptCatalogue) {
    TempDir dir;
    write_file(dir / "catalogue.meta", "garbage without equals\n");
    EXPECT_FORGE_ERROR(Store store(dir.path()), errc::CorruptStore);
}

TEST(Store, FsckFindings) {
    TempDir dir;
    Store store(dir.path());
    auto a = sample(store, "a");
    auto b = sample(store, "b");
    store.save(a);
    store.save(b);
    EXPECT_TRUE(store.fsck().empty());

    fs::remove_all(store.job_dir(a.id));
    auto findings = store.fsck();
    ASSERT_EQ(findings.size(), 1u);
    EXPECT_EQ(findings[0].kind, Finding::Kind::MissingDirectory);
    EXPECT_EQ(findings[0].job_id, a.id);

    // Rewrite b's meta with another status behind the catalogue's back.
    store.remove(a.id);
    auto kv = to_kv(b);
    kv.set("status", "completed");
    write_file(store.meta_path(b.id), kv.serialize());
    findings = store.fsck();
    ASSERT_EQ(findings.size(), 1u);
    EXPECT_EQ(findings[0].kind, Finding::Kind::StatusMismatch);
}

TEST(Store, RenameHookFailureKeepsPreviousVersion) {
    TempDir dir;
    Store store(dir.path());
    auto j = sample(store);
    store.save(j);
    store.set_rename_hook([](const fs::path&, const fs::path&) { throw std::runtime_error("crash"); });
    auto changed = j;
    changed.name = "changed";
    EXPECT_THROW(store.save(changed), std::runtime_error);
    Store reopened(dir.path());
    EXPECT_EQ(reopened.load(j.id), j);
}

TEST(Store, RefreshSeesOtherWriters) {
    TempDir dir;
    Store first(dir.path());
    Store second(dir.path());
    auto j = sample(first);
    first.save(j);
    EXPECT_TRUE(second.list().empty());
    second.refresh();
    EXPECT_EQ(second.list().size(), 1u);
}

TEST(Fsutil, AtomicWriteAndDigest) {
    TempDir dir;
    write_file_atomic(dir / "x" / "f.txt", "hello");
    EXPECT_EQ(read_file(dir / "x" / "f.txt"), "hello");
    EXPECT_FALSE(fs::exists(dir / "x" / "f.txt.tmp"));
    copy_file_over(dir / "x" / "f.txt", dir / "y" / "g.txt");
    EXPECT_EQ(file_digest(dir / "x" / "f.txt"), file_digest(dir / "y" / "g.txt"));
    EXPECT_FORGE_ERROR(read_file(dir / "missing"), errc::IoError);
}

}  // namespace
}  // namespace forge
