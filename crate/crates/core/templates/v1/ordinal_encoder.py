from sklearn.preprocessing import OrdinalEncoder

_CATEGORICAL_COLS = {COLUMNS}
for _col in _CATEGORICAL_COLS:
    __encoder = OrdinalEncoder(handle_unknown="use_encoded_value", unknown_value=-1)
    __train_dataset[_col] = __encoder.fit_transform(__train_dataset[_col].astype(str).values.reshape(-1, 1))[:, 0]
    __test_dataset[_col] = __encoder.transform(__test_dataset[_col].astype(str).values.reshape(-1, 1))[:, 0]
