from sklearn.preprocessing import OneHotEncoder

_CATEGORICAL_COLS = {COLUMNS}
__encoder = OneHotEncoder(handle_unknown="ignore")
__train_onehot = __encoder.fit_transform(__train_dataset[_CATEGORICAL_COLS].astype(str)).toarray()
__test_onehot = __encoder.transform(__test_dataset[_CATEGORICAL_COLS].astype(str)).toarray()
__onehot_names = [str(_n) for _n in __encoder.get_feature_names_out(_CATEGORICAL_COLS)]
__train_dataset = pd.concat([__train_dataset.drop(_CATEGORICAL_COLS, axis=1),
                             pd.DataFrame(__train_onehot, columns=__onehot_names, index=__train_dataset.index)], axis=1)
__test_dataset = pd.concat([__test_dataset.drop(_CATEGORICAL_COLS, axis=1),
                            pd.DataFrame(__test_onehot, columns=__onehot_names, index=__test_dataset.index)], axis=1)
