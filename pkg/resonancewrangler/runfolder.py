import os

from resonancewrangler import errors, manifest

MANIFEST_NAME = "manifest.json"
CSV_OPTIONS = {"index": False, "lineterminator": "\n", "float_format": "%.12g"}


class IncompleteRunFolderError(errors.ResonanceError):
    """Indicates that a RunFolder was constructed for a folder that is not a valid run folder. If you wish to create a RunFolder, call its spawn method."""
    pass


class RunFolder(object):
    """Represents a folder holding the artifacts of one run and the manifest that lists them."""

    @staticmethod
    def check(fname):
        """Checks that a given relative or absolute path would yield a valid RunFolder."""
        absfname = os.path.abspath(fname)

        if not os.path.isdir(absfname):
            return False
        if not os.path.isfile(os.path.join(absfname, MANIFEST_NAME)):
            return False

        # LGTM
        return True

    @staticmethod
    def _ensure_directory_exists(absfname):
        if os.path.lexists(absfname):
            if not os.path.isdir(absfname):
                raise OSError("%s exists and is not a directory" % absfname)
            # already exists, we're done
        else:
            os.makedirs(absfname)

    @classmethod
    def spawn(cls, fname, record):
        """Turns a folder (created if needed) into a valid RunFolder with a fresh manifest holding the given top-level fields. Raises OSError if this is impossible."""
        absfname = os.path.abspath(fname)

        cls._ensure_directory_exists(absfname)
        if os.path.exists(os.path.join(absfname, MANIFEST_NAME + ".lock")):
            raise manifest.FileLockError("%s is in use by another run" % absfname)
        manifest.ManifestFile.create(os.path.join(absfname, MANIFEST_NAME), record)

        return cls(fname)

    def __init__(self, fname):
        if not self.check(fname):
            raise IncompleteRunFolderError("%s is not a run folder" % fname)

        self._fname = os.path.abspath(fname)

    @property
    def fname(self):
        """Returns the absolute path to the folder on disk that this RunFolder represents."""
        return self._fname

    def path(self, name):
        return os.path.join(self._fname, name)

    def open(self, name, mode="r"):
        """Opens the file of the given name in the run folder. This does not check against e.g. someone passing in .., so it shouldn't be fed untrusted names."""
        return open(self.path(name), mode, encoding="utf_8", newline="")

    def __contains__(self, name):
        return os.path.isfile(self.path(name))

    def open_manifest(self, lock=True):
        """Returns a new ManifestFile for the manifest of this RunFolder.

        Despite its name, this method does not return a file object or file-like object. See the ManifestFile documentation for details on its interface.
        """
        return manifest.ManifestFile(self.path(MANIFEST_NAME), lock=lock)

    def write_table(self, mf, name, frame, description=""):
        """Writes a DataFrame as CSV and lists it in the manifest."""
        with self.open(name, "w") as out:
            frame.to_csv(out, **CSV_OPTIONS)
        mf.add(name, "csv", description)

    def write_text(self, mf, name, text, kind="text", description=""):
        """Writes a text artifact and lists it in the manifest."""
        with self.open(name, "w") as out:
            out.write(text)
        mf.add(name, kind, description)
