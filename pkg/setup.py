from setuptools import setup, find_packages

setup(
	name='steerpy',
	version='0.1.0',
	packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
	install_requires=[
					'numpy',
					'scipy',
					'pyyaml',
					],
	extras_require={
		'tests': ['pytest'],
	},
	entry_points={
		"console_scripts": [
			"steerpy = steerpy.steerpy:Main"
		]
	}
)
