import codecs
import json
import os
import re

from resonancewrangler import errors


class Manifest(object):
    """Represents the manifest of a run folder: the config echo, library versions, the seed and one entry per artifact.

    The ManifestFile class adds locking and autocommit features, while providing a compatible interface to Manifest. You should prefer ManifestFile over Manifest when the manifest in question is stored on disk.
    """

    def __init__(self, fp):
        """Initializes a new Manifest object.

        Args:
            fp: a readable file-like object storing the JSON file. It should be an object with a "files" array. The Manifest does not preserve a reference to fp.
        """
        self._manifest = self._load(fp)

    @staticmethod
    def _load(fp):
        record = json.load(fp)
        if not isinstance(record, dict) or not isinstance(record.get("files"), list):
            raise ValueError("a run manifest is an object with a files array")
        return record

    def commit(self, fp):
        """Writes the Manifest to the given writable file-like object."""
        json.dump(self._manifest, fp, indent=2, sort_keys=True)
        fp.write("\n")

    def get(self, key):
        """Returns a top-level field of the manifest (config, versions, seed, experiment, ...)."""
        return self._manifest[key]

    def __getitem__(self, key):
        return self.get(key)

    def __contains__(self, key):
        return key in self._manifest

    def __len__(self):
        return len(self._manifest["files"])

    def search(self, field, query, is_regex):
        """Returns the names of all artifacts whose given field matches the query."""
        results = []
        for entry in self._manifest["files"]:
            if field not in entry:
                continue
            if is_regex:
                if re.search(query, entry[field]):
                    results.append(entry["name"])
            elif entry[field] == query:
                results.append(entry["name"])
        return results

    # These methods modify the manifest, and should trigger autocommit for ManifestFile.
    # If you define a new method that should trigger autocommit, mention it in ManifestFile.__getattr__.

    def add(self, name, kind, description=""):
        """Lists an artifact; an entry of the same name is replaced in place. Returns its index."""
        entry = {"name": name, "kind": kind, "description": description}
        for idx, existing in enumerate(self._manifest["files"]):
            if existing["name"] == name:
                self._manifest["files"][idx] = entry
                return idx
        self._manifest["files"].append(entry)
        return len(self._manifest["files"]) - 1

    def set(self, key, value):
        """Sets a top-level field."""
        if key == "files":
            raise KeyError("artifact entries are changed through add")
        self._manifest[key] = value


class ManifestFile(object):
    """Interacts with a manifest stored on disk, adding autocommit and locking features.

    Methods that are not explicitly overriden in this class are delegated to Manifest (except that all functions that modify the manifest will trigger autocommit if it is set). You should use this class in preference to Manifest when the manifest is stored on disk.
    """

    # These methods deal with context: creating and destroying a ManifestFile.

    def __init__(self, fname, autocommit=True, lock=True, encoding="utf_8"):
        """Creates a new ManifestFile. Raises ValueError if the given file does not exist.

        Args:
            fname: The file where this manifest is stored.
            autocommit: If true, all method calls that modify the manifest write the results back to disk immediately. If false, you must call commit.
            lock: If true, also generate a lock file that prevents multiple open ManifestFiles from governing the same file on disk, and so two runs from writing into one folder.
            encoding: The character encoding of the file on disk.
        """
        if not os.path.isfile(fname):
            raise ValueError("no manifest at %s" % fname)
        self._fname = os.path.abspath(fname)
        self._autocommit = autocommit
        self._lock = lock
        self._encoding = encoding
        self._mf = None

        # Locking; create the file; we don't need the fd
        if self._lock:
            try:
                os.close(os.open(self._fname + ".lock", os.O_CREAT | os.O_EXCL | os.O_RDONLY))
            except OSError:  # file already exists
                raise FileLockError("%s is locked by another run" % self._fname)

        try:
            with codecs.open(self._fname, "r", encoding) as mf_file:
                self._mf = Manifest(mf_file)
        except Exception:
            self._unlock()
            raise

    @staticmethod
    def create(fname, record, encoding="utf_8"):
        """Writes a fresh manifest holding the given top-level fields and no artifacts."""
        record = dict(record)
        record["files"] = []
        with codecs.open(fname, "w", encoding) as mf_file:
            json.dump(record, mf_file, indent=2, sort_keys=True)
            mf_file.write("\n")

    def __enter__(self):
        # We've already initialized the context in __init__
        return self

    def _unlock(self):
        if self._lock and os.path.exists(self._fname + ".lock"):
            os.remove(self._fname + ".lock")

    def close(self):
        """Closes this ManifestFile. Attempts to use a closed ManifestFile will raise a ValueError. This method is idempotent."""
        if self._mf is not None:
            self._unlock()

        # We signal that a ManifestFile has been closed by setting its manifest to None.
        self._mf = None

    def __exit__(self, e_type, unused_e, unused_e_traceback):
        # Closure is idempotent, and we shouldn't leave random lock files around.
        self.close()

        if e_type:
            return False  # propagate the exception

    # Commits shouldn't take a file-like object anymore.

    def commit(self):
        if self._mf is None:
            raise ValueError("manifest is closed")

        with codecs.open(self._fname, "w", self._encoding) as mf_file:
            self._mf.commit(mf_file)

    # Other methods delegate to the Manifest, but we should autocommit and check for closure.
    def __getattr__(self, attr):
        if attr.startswith("_"):
            raise AttributeError(attr)
        if self._mf is None:
            raise ValueError("manifest is closed")

        # If autocommit is on, add and set should commit.
        if self._autocommit and attr in ("add", "set"):
            method = getattr(self._mf, attr)

            def committing(*args, **kwargs):
                result = method(*args, **kwargs)
                self.commit()
                return result
            return committing

        return getattr(self._mf, attr)

    def __len__(self):
        if self._mf is None:
            raise ValueError("manifest is closed")
        return len(self._mf)

    def __contains__(self, key):
        if self._mf is None:
            raise ValueError("manifest is closed")
        return key in self._mf

    def __getitem__(self, key):
        if self._mf is None:
            raise ValueError("manifest is closed")
        return self._mf[key]


class FileLockError(errors.ResonanceError):
    """Indicates that a ManifestFile was constructed using lock = True, but another ManifestFile was already using that file."""
    pass
