from sklearn.impute import SimpleImputer

_NUMERIC_COLS_WITH_MISSING_VALUES = {COLUMNS}
for _col in _NUMERIC_COLS_WITH_MISSING_VALUES:
    __imputer = SimpleImputer(missing_values=np.nan, strategy="mean")
    __train_dataset[_col] = __imputer.fit_transform(__train_dataset[_col].values.reshape(-1, 1))[:, 0]
    __test_dataset[_col] = __imputer.transform(
        __test_dataset[_col].astype(__train_dataset[_col].dtypes).values.reshape(-1, 1))[:, 0]
