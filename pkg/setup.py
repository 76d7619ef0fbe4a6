import setuptools

setuptools.setup(use_scm_version={'fallback_version': '0.1.0'})
