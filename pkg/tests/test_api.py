import rabideco


def test_public_names_resolve():
    for name in rabideco.__all__:
        assert getattr(rabideco, name) is not None


def test_version():
    assert rabideco.__version__
