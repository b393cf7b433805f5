#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace apklab {

// Filesystem snapshot manifest: one JSON object per line, sorted by path.
// kind "error" marks entries that could not be read; they are excluded from
// diffs. Files carry size+sha256, symlinks carry their target string.
struct ManifestEntry {
    std::string path;    // normalized absolute path
    std::string kind;    // file | dir | symlink | error
    std::uint64_t size = 0;
    std::string sha256;  // files only
    std::string mode;    // octal string, e.g. "0644"
    std::string target;  // symlinks only

    bool operator==(const ManifestEntry&) const = default;
};

struct SnapshotManifest {
    std::vector<ManifestEntry> entries;  // sorted by path, unique
};

// Walks a real directory tree; paths are recorded absolute relative to the
// tree root ("/" prefix). Unreadable entries become kind=error.
SnapshotManifest snapshot_tree(const std::filesystem::path& root);

std::string manifest_entry_to_line(const ManifestEntry& entry);
SnapshotManifest read_manifest(const std::filesystem::path& file);
void write_manifest(const std::filesystem::path& file, SnapshotManifest manifest);

struct ModifiedEntry {
    std::string path;
    std::string pre_sha256;   // content identity: digest, or symlink target
    std::string post_sha256;
};

struct ModeChange {
    std::string path;
    std::string pre_mode;
    std::string post_mode;
};

// created/deleted/modified are pairwise disjoint. Mode changes are reported
// independently: a path whose content and mode both changed appears in
// modified and in mode_changed.
struct FsDiff {
    std::vector<std::string> created;
    std::vector<std::string> deleted;
    std::vector<ModifiedEntry> modified;
    std::vector<ModeChange> mode_changed;
};

FsDiff diff_manifests(const SnapshotManifest& pre, const SnapshotManifest& post);

}  // namespace apklab
